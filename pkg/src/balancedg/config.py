"""Flat ``key = value`` run files with namespaced keys.

Example::

    run.example = 4
    mesh.cells = 32
    scheme.kind = wb-hllc
    limiter.pp = on
    output.dir = results

Blank lines and ``#`` comments are ignored.  ``example.<name>`` passes an
extra parameter (such as ``example.amplitude``) through to the example builder.
"""
from .errors import DomainError

_BOOL = {"on": True, "off": False, "true": True, "false": False, "yes": True, "no": False,
         "1": True, "0": False}


def _bool(text):
    try:
        return _BOOL[text.lower()]
    except KeyError:
        raise DomainError(f"expected on/off, got {text!r}") from None


def _int_list(text):
    return [int(v) for v in text.replace(",", " ").split()]


def _auto(text):
    low = text.lower()
    if low in ("on", "off", "true", "false", "yes", "no"):
        return _BOOL[low]
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


# file key -> (option name, converter)
KEYS = {
    "run.example": ("example", int),
    "run.convergence": ("convergence", _int_list),
    "run.seed": ("seed", int),
    "run.threads": ("threads", int),
    "mesh.cells": ("cells", int),
    "mesh.nx": ("nx", int),
    "mesh.ny": ("ny", int),
    "scheme.degree": ("degree", int),
    "scheme.kind": ("scheme", str),
    "scheme.eos": ("eos", str),
    "time.cfl": ("cfl", float),
    "time.end": ("end_time", float),
    "limiter.pp": ("pp_limiter", _bool),
    "limiter.trouble_cells": ("trouble_cells", _bool),
    "limiter.tvb_m": ("tvb_m", float),
    "output.dir": ("out", str),
    "output.samples": ("samples", int),
}


def parse_config(text):
    """Parse run-file text into ``(options, example_extras)`` dictionaries."""
    options, extras = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise DomainError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key.startswith("example.") and len(key) > len("example."):
            extras[key[len("example."):]] = _auto(value)
            continue
        if key not in KEYS:
            raise DomainError(f"line {lineno}: unknown key {key!r}")
        name, conv = KEYS[key]
        try:
            options[name] = conv(value)
        except ValueError as exc:
            raise DomainError(f"line {lineno}: bad value for {key}: {exc}") from None
    return options, extras


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())
