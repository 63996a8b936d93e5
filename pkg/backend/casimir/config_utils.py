"""
Utility functions for run configuration files

A run configuration is an INI file:

    [ensemble]      units, reference_radius, eps_background, temperature
    [sphere.<id>]   center, radius, eps            (one section per sphere)
    [spectral]      lmax, nodes, matsubara_lmax, threads, curvature
    [scan]          x_min, x_max, steps, theta_min, theta_max, theta_steps
    [largen]        n_min, n_max, coupling, radius, separation
    [output]        path, targets

Values are returned as strings (lists split on commas) for the serializers to
type-check.
"""
import configparser
import logging
import re

from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)

SECTIONS = ('ensemble', 'spectral', 'scan', 'largen', 'output')
# sections validated even when absent from the file
REQUIRED_SECTIONS = ('ensemble', 'spectral', 'scan', 'output')
LIST_KEYS = {'center', 'targets'}
SPHERE_SECTION = re.compile(r'^sphere\.(.+)$')

# command-line flag -> (section, key)
OVERRIDES = {
    'lmax': ('spectral', 'lmax'),
    'temp': ('ensemble', 'temperature'),
    'out': ('output', 'path'),
}


def _split(value):
    return [item.strip() for item in value.split(',') if item.strip()]


def _section_dict(section):
    return {key: _split(value) if key in LIST_KEYS else value for key, value in section.items()}


def read_config(path):
    """Parse an INI run configuration, raising ValidationError on syntax problems"""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding='utf-8') as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ValidationError(f"Cannot read configuration {path}: {exc.strerror}")
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}")
    return parser


def apply_overrides(parser, **flags):
    """Write command-line flag values over the file values; None leaves the file value"""
    for flag, value in flags.items():
        if value is None or flag not in OVERRIDES:
            continue
        section, key = OVERRIDES[flag]
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, str(value))
        logger.debug(f"Override {section}.{key} = {value}")
    return parser


def config_to_data(parser):
    """Nested mapping for RunConfigSerializer"""
    data = {name: _section_dict(parser[name]) if parser.has_section(name) else {}
            for name in SECTIONS if name in REQUIRED_SECTIONS or parser.has_section(name)}
    spheres = []
    for name in parser.sections():
        match = SPHERE_SECTION.match(name)
        if match:
            spheres.append({'id': match.group(1), **_section_dict(parser[name])})
        elif name not in SECTIONS:
            logger.warning(f"Ignoring unknown configuration section [{name}]")
    data['spheres'] = spheres
    return data


def load_config_data(path, **flags):
    """Read, override and flatten a configuration file in one step"""
    return config_to_data(apply_overrides(read_config(path), **flags))


def _field_messages(prefix, errors):
    if isinstance(errors, dict):
        messages = []
        for key, value in errors.items():
            name = prefix if key == 'non_field_errors' else f"{prefix}.{key}"
            messages.extend(_field_messages(name, value))
        return messages
    if isinstance(errors, (list, tuple)):
        messages = []
        for item in errors:
            if isinstance(item, (dict, list, tuple)):
                messages.extend(_field_messages(prefix, item))
            else:
                messages.append(f"{prefix}: {item}")
        return messages
    return [f"{prefix}: {errors}"]


def format_errors(detail, data=None):
    """
    Serializer errors as ``section.key: message`` lines.

    Sphere errors are named after their section, e.g. ``sphere.2.eps``.
    """
    sphere_ids = [sphere.get('id') for sphere in (data or {}).get('spheres', [])]
    messages = []
    for section, errors in detail.items():
        if section == 'spheres' and isinstance(errors, list) and all(isinstance(e, dict) for e in errors):
            for sphere_id, sphere_errors in zip(sphere_ids, errors):
                if sphere_errors:
                    messages.extend(_field_messages(f"sphere.{sphere_id}", sphere_errors))
        elif section == 'non_field_errors':
            messages.extend(_field_messages('config', errors))
        else:
            messages.extend(_field_messages(section, errors))
    return messages
