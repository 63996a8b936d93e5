from dataclasses import dataclass, field

from django.conf import settings
from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers

from .ensemble_models import build_ensemble
from .mie import MaterialPair
from .spectral import spectral_context

UNITS_RADIUS = 'radius'
UNITS_METERS = 'meters'

COMMAND_FORCE = 'force'
COMMAND_SCAN_TWO = 'scan2'
COMMAND_SCAN_THREE = 'scan3'
COMMAND_LARGE_N = 'largen'

SPHERE_COUNTS = {
    COMMAND_FORCE: None,
    COMMAND_SCAN_TWO: 2,
    COMMAND_SCAN_THREE: 3,
}


@dataclass
class RunConfig:
    """Validated run configuration with every length in meters"""

    command: str
    ensemble: object = None
    eps_background: float = 1.0
    temperature: float = 0.0
    l_max: int = None
    n_nodes: int = None
    matsubara_l_max: int = None
    threads: int = None
    curvature: bool = False
    scan: dict = field(default_factory=dict)
    largen: dict = field(default_factory=dict)
    output_path: str = ''
    targets: list = field(default_factory=list)

    def spectral(self):
        return spectral_context(self.temperature, self.eps_background, self.n_nodes, self.matsubara_l_max)


class EnsembleSectionSerializer(serializers.Serializer):
    """Serializer for the [ensemble] section"""
    units = serializers.ChoiceField(choices=[UNITS_RADIUS, UNITS_METERS], default=UNITS_RADIUS)
    reference_radius = serializers.FloatField(required=False)
    eps_background = serializers.FloatField(default=1.0)
    temperature = serializers.FloatField(min_value=0.0, default=0.0)

    def validate_reference_radius(self, value):
        if value <= 0:
            raise serializers.ValidationError("Must be positive.")
        return value

    def validate_eps_background(self, value):
        if value <= 0:
            raise serializers.ValidationError("Must be positive.")
        return value

    def validate(self, data):
        if data['units'] == UNITS_RADIUS and 'reference_radius' not in data:
            raise serializers.ValidationError(
                {'reference_radius': "Required when units = radius (radius of sphere 1 in meters)."}
            )
        return data


class SphereSectionSerializer(serializers.Serializer):
    """Serializer for one [sphere.<id>] section"""
    id = serializers.IntegerField()
    center = serializers.ListField(child=serializers.FloatField(), min_length=3, max_length=3)
    radius = serializers.FloatField(required=False)
    eps = serializers.FloatField()

    def validate_radius(self, value):
        if value <= 0:
            raise serializers.ValidationError("Must be positive.")
        return value

    def validate_eps(self, value):
        if value <= 0:
            raise serializers.ValidationError("Must be positive.")
        return value


class SpectralSectionSerializer(serializers.Serializer):
    """Serializer for the [spectral] section"""
    lmax = serializers.IntegerField(min_value=1, required=False)
    nodes = serializers.IntegerField(min_value=1, required=False)
    matsubara_lmax = serializers.IntegerField(min_value=1, required=False)
    threads = serializers.IntegerField(min_value=1, required=False)
    curvature = serializers.BooleanField(required=False)


class ScanSectionSerializer(serializers.Serializer):
    """Serializer for the [scan] section; x is r / R1 and theta is in radians"""
    x_min = serializers.FloatField(required=False)
    x_max = serializers.FloatField(required=False)
    steps = serializers.IntegerField(min_value=1, default=1)
    theta_min = serializers.FloatField(default=0.0)
    theta_max = serializers.FloatField(required=False)
    theta_steps = serializers.IntegerField(min_value=1, default=1)

    def validate(self, data):
        if 'x_min' in data and data.get('x_max', data['x_min']) < data['x_min']:
            raise serializers.ValidationError({'x_max': "Must not be below x_min."})
        if data.get('theta_max', data['theta_min']) < data['theta_min']:
            raise serializers.ValidationError({'theta_max': "Must not be below theta_min."})
        return data


class LargeNSectionSerializer(serializers.Serializer):
    """Serializer for the [largen] section"""
    n_min = serializers.IntegerField(min_value=3, default=3)
    n_max = serializers.IntegerField(min_value=3, required=False)
    coupling = serializers.FloatField()
    radius = serializers.FloatField(required=False)
    separation = serializers.FloatField()

    def validate(self, data):
        if data.get('n_max', data['n_min']) < data['n_min']:
            raise serializers.ValidationError({'n_max': "Must not be below n_min."})
        return data


class OutputSectionSerializer(serializers.Serializer):
    """Serializer for the [output] section"""
    path = serializers.CharField(required=False, allow_blank=True, default='')
    targets = serializers.ListField(child=serializers.IntegerField(), required=False, default=list)


class RunConfigSerializer(serializers.Serializer):
    """
    Validates a parsed run configuration for one command.

    The command is passed in the serializer context; ``save()`` returns a
    ``RunConfig`` whose ensemble has been built and checked for overlaps.
    """
    ensemble = EnsembleSectionSerializer()
    spheres = SphereSectionSerializer(many=True, required=False, default=list)
    spectral = SpectralSectionSerializer(required=False, default=dict)
    scan = ScanSectionSerializer(required=False, default=dict)
    largen = LargeNSectionSerializer(required=False)
    output = OutputSectionSerializer(required=False, default=dict)

    @property
    def command(self):
        return self.context.get('command', COMMAND_FORCE)

    def _scale(self, ensemble):
        """Meters per configured length unit"""
        if ensemble['units'] == UNITS_METERS:
            return 1.0
        return ensemble['reference_radius']

    def _validate_spheres(self, ensemble, spheres, scale):
        expected = SPHERE_COUNTS[self.command]
        if len(spheres) < 2 or (expected and len(spheres) != expected):
            wanted = expected or 'at least 2'
            raise serializers.ValidationError(
                {'spheres': f"The {self.command} command needs {wanted} spheres, got {len(spheres)}."}
            )
        for index, sphere in enumerate(spheres):
            if 'radius' not in sphere and ensemble['units'] == UNITS_METERS:
                raise serializers.ValidationError(
                    {'spheres': f"sphere.{sphere['id']}.radius is required when units = meters."}
                )
            if index == 0 and ensemble['units'] == UNITS_RADIUS and sphere.get('radius', 1.0) != 1.0:
                raise serializers.ValidationError(
                    {'spheres': f"sphere.{sphere['id']}.radius must be 1 when units = radius."}
                )
        try:
            return build_ensemble(
                [[c * scale for c in s['center']] for s in spheres],
                [MaterialPair(s['eps'], ensemble['eps_background'], s.get('radius', 1.0) * scale)
                 for s in spheres],
                ensemble['eps_background'],
                ensemble['temperature'],
                ids=[s['id'] for s in spheres],
            )
        except DjangoValidationError as exc:
            raise serializers.ValidationError({'ensemble': exc.messages})

    def _validate_scan(self, scan, model):
        if 'x_min' not in scan:
            raise serializers.ValidationError({'scan': {'x_min': "Required for the scan commands."}})
        radii = [model.reduced_radius(i) for i in model.ids]
        contact = radii[0] + radii[1]
        if self.command == COMMAND_SCAN_TWO and scan['x_min'] <= contact:
            raise serializers.ValidationError(
                {'scan': {'x_min': f"Must exceed (R1 + R2) / R1 = {contact:.6g}; the spheres would overlap."}}
            )

    def validate(self, data):
        ensemble = data['ensemble']
        scale = self._scale(ensemble)

        model = None
        if self.command == COMMAND_LARGE_N:
            largen = data.get('largen')
            if largen is None:
                raise serializers.ValidationError({'largen': "The largen command needs a [largen] section."})
            radius = largen.get('radius', 1.0) * scale
            separation = largen['separation'] * scale
            if separation <= 2 * radius:
                raise serializers.ValidationError(
                    {'largen': {'separation': "Neighbour separation must exceed the sphere diameter."}}
                )
            data['largen'] = dict(largen, radius=radius, separation=separation,
                                  n_max=largen.get('n_max', largen['n_min']))
        else:
            model = self._validate_spheres(ensemble, data['spheres'], scale)
            if self.command in (COMMAND_SCAN_TWO, COMMAND_SCAN_THREE):
                self._validate_scan(data['scan'], model)
            unknown = [t for t in data['output'].get('targets', []) if t not in model.ids]
            if unknown:
                raise serializers.ValidationError({'output': {'targets': f"No spheres with ids {unknown}."}})

        data['ensemble'] = ensemble
        data['model'] = model
        return data

    def create(self, validated_data):
        ensemble = validated_data['ensemble']
        spectral = validated_data['spectral']
        output = validated_data['output']
        model = validated_data['model']
        scan = dict(validated_data['scan'])
        scan.setdefault('x_max', scan.get('x_min'))
        scan.setdefault('theta_max', scan['theta_min'])
        return RunConfig(
            command=self.command,
            ensemble=model,
            eps_background=ensemble['eps_background'],
            temperature=ensemble['temperature'],
            l_max=spectral.get('lmax'),
            n_nodes=spectral.get('nodes'),
            matsubara_l_max=spectral.get('matsubara_lmax') or settings.CASIMIR_MATSUBARA_L_MAX,
            threads=spectral.get('threads'),
            curvature=spectral.get('curvature', False),
            scan=scan,
            largen=validated_data.get('largen') or {},
            output_path=output.get('path', ''),
            targets=output.get('targets') or (model.ids if model else []),
        )
