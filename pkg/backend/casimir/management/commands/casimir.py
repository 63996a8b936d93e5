"""
Casimir force calculations driven by an INI run configuration.

    python manage.py casimir force  --config run.ini [--lmax N] [--temp K] [--out path]
    python manage.py casimir scan2  --config run.ini ...
    python manage.py casimir scan3  --config run.ini ...
    python manage.py casimir largen --config run.ini ...

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
import logging

import numpy as np
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from casimir.config_utils import format_errors, load_config_data
from casimir.csv_utils import (
    FORCE_HEADER, LARGE_N_HEADER, SCAN_THREE_HEADER, SCAN_TWO_HEADER, render_csv, write_csv,
)
from casimir.exceptions import CasimirError
from casimir.force import force_on_sphere
from casimir.large_n import large_N_table
from casimir.serializers import (
    COMMAND_FORCE, COMMAND_LARGE_N, COMMAND_SCAN_THREE, COMMAND_SCAN_TWO, RunConfigSerializer,
)
from casimir.three_sphere import three_sphere_potential
from casimir.two_sphere import two_sphere_finite_T, two_sphere_retarded_series

logger = logging.getLogger(__name__)

EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


def force_rows(config):
    spectral = config.spectral()
    for target in config.targets:
        result = force_on_sphere(config.ensemble, target, config.l_max, spectral,
                                 curvature=config.curvature, threads=config.threads)
        yield (target, *result.force, result.convergence_estimate)


def scan_two_rows(config):
    first, second = config.ensemble.spheres[:2]
    scan = config.scan
    for x in np.linspace(scan['x_min'], scan['x_max'], scan['steps']):
        r = x * first.radius
        if config.temperature > 0:
            series = two_sphere_finite_T(first.material, second.material, r, config.temperature,
                                         l_max=config.matsubara_l_max, max_order=config.l_max,
                                         curvature=config.curvature)
        else:
            series = two_sphere_retarded_series(first.material, second.material, r, max_order=config.l_max,
                                                curvature=config.curvature)
        yield x, series.force


def scan_three_rows(config):
    scan = config.scan
    x_values = np.linspace(scan['x_min'], scan['x_max'], scan['steps'])
    theta_values = np.linspace(scan['theta_min'], scan['theta_max'], scan['theta_steps'])
    surface = three_sphere_potential(config.ensemble, x_values, theta_values, l_max=config.l_max or 1)
    for i, x in enumerate(x_values):
        for j, theta in enumerate(theta_values):
            yield x, theta, surface[i, j]


def large_n_rows(config):
    largen = config.largen
    rows = large_N_table(range(largen['n_min'], largen['n_max'] + 1), largen['coupling'],
                         largen['radius'], largen['separation'], config.temperature, config.eps_background)
    for row in rows:
        yield row.N, row.V_dimensionless, row.sign, row.ratio


COMMANDS = {
    COMMAND_FORCE: (FORCE_HEADER, force_rows, "Force on every target sphere"),
    COMMAND_SCAN_TWO: (SCAN_TWO_HEADER, scan_two_rows, "Two-sphere force against x = r / R1"),
    COMMAND_SCAN_THREE: (SCAN_THREE_HEADER, scan_three_rows, "Three-sphere potential on an (x, theta) grid"),
    COMMAND_LARGE_N: (LARGE_N_HEADER, large_n_rows, "Large-N potential estimate against N"),
}


class Command(BaseCommand):
    help = "Compute Casimir forces and potentials of dielectric spheres and write them as CSV"

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='subcommand', required=True)
        for name, (_, _, description) in COMMANDS.items():
            subparser = subparsers.add_parser(name, help=description)
            subparser.add_argument('--config', required=True, help="INI run configuration")
            subparser.add_argument('--lmax', type=int, help="Multipole truncation, overrides [spectral] lmax")
            subparser.add_argument('--temp', type=float, help="Temperature in K, overrides [ensemble] temperature")
            subparser.add_argument('--out', help="Output CSV path, overrides [output] path")

    def load(self, command, options):
        data = load_config_data(options['config'], lmax=options.get('lmax'),
                                temp=options.get('temp'), out=options.get('out'))
        serializer = RunConfigSerializer(data=data, context={'command': command})
        if not serializer.is_valid():
            raise CommandError('\n'.join(format_errors(serializer.errors, data)), returncode=EXIT_CONFIG_ERROR)
        return serializer.save()

    def handle(self, *args, **options):
        command = options['subcommand']
        header, rows, _ = COMMANDS[command]
        try:
            config = self.load(command, options)
            logger.info(f"Running {command} with configuration {options['config']}")
            if config.output_path:
                write_csv(config.output_path, header, rows(config))
                logger.info(f"Wrote {config.output_path}")
            else:
                self.stdout.write(render_csv(header, rows(config)), ending='')
        except ValidationError as exc:
            raise CommandError('\n'.join(exc.messages), returncode=EXIT_CONFIG_ERROR)
        except CasimirError as exc:
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=EXIT_NUMERICAL_ERROR)
