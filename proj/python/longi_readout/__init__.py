"""Python interface to the longitudinal-readout toolkit.

Functions that exchange structured data take and return plain dicts; the
extension module passes them across as JSON text.
"""

import json as _json

from . import _longi
from ._longi import (
    DEFAULT_HOMODYNE_ANGLE,
    CavityTrajectory,
    ConfigError,
    InfeasibleError,
    LongiError,
    Modulation,
    SNRCurve,
    SqueezeSpec,
    SystemParams,
    baseline,
    bessel_j,
    bessel_j_series,
    eval_poly_gc,
    eval_trig_gc,
    euler_lagrange_residual,
    fit_scaling_exponent,
    gz_from_gc,
    magnus_average,
    make_trajectory,
    pointer_separation,
    poly_modulation,
    snr_curve,
    trig_modulation,
    uniform_grid,
)
from ._longi import TruncationError


def error_info(exc):
    """Decode the {"error": {...}} document carried by a LongiError."""
    return _json.loads(str(exc))["error"]


def verify_boundaries(modulation, params, tol=1e-6):
    return _json.loads(_longi.verify_boundaries(modulation, params, tol))


def ga_run(params, config=None):
    return _json.loads(_longi.ga_run(params, _json.dumps(config or {})))


def circuit_report(params=None):
    return _json.loads(_longi.circuit_report(_json.dumps(params) if params else ""))


def minimal_time(params, u_max=None):
    if u_max is None:
        return _json.loads(_longi.minimal_time(params))
    return _json.loads(_longi.minimal_time(params, u_max))


def config_digest(config):
    return _longi.config_digest(_json.dumps(config))


def run_experiment(config):
    """Run one experiment config (a dict) and return directory, files and summary."""
    return _json.loads(_longi.run_experiment(_json.dumps(config)))
