"""Scenario JSON loading with field-level error reporting.

Schema (see also scenarios/default.json)::

    {
      "platoon": {"n", "tau_d", "h", "r", "L", "k_p", "k_d", "T",
                  "v0_init", "a0_init", "p_lead_init"},
      "braking": {"t_brake", "gamma", "eta"},
      "loss":    {"kind": "consecutive", "ell"} |
                 {"kind": "bernoulli", "p", "seed"},
      "sim":     {"t_end", "rule", "alpha", "n_bar"}
    }

``L`` is a single length or a list of per-follower lengths.  Unknown keys
are rejected so typos fail loudly.  All loader errors carry the offending
field path for the CLI to report.
"""

import json

from .comms import LossModel
from .errors import ConfigurationError
from .model import PlatoonParams
from .braking import BrakeParams
from .simulator import SimConfig
from .stepper import StepRule

__all__ = ["ScenarioError", "load_scenario", "scenario_from_dict"]


class ScenarioError(ConfigurationError):
    """A scenario file is malformed; ``field`` points at the problem."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


def _section(doc, name):
    if name not in doc:
        raise ScenarioError(name, "missing section")
    if not isinstance(doc[name], dict):
        raise ScenarioError(name, f"expected an object, got {type(doc[name]).__name__}")
    return doc[name]


def _build(section_name, section, builder, known):
    unknown = set(section) - known
    if unknown:
        raise ScenarioError(f"{section_name}.{sorted(unknown)[0]}", "unknown field")
    try:
        return builder(**section)
    except ConfigurationError as exc:
        raise ScenarioError(section_name, str(exc)) from exc
    except TypeError as exc:
        raise ScenarioError(section_name, str(exc)) from exc


def scenario_from_dict(doc):
    if not isinstance(doc, dict):
        raise ScenarioError("<root>", f"expected a JSON object, got {type(doc).__name__}")
    unknown = set(doc) - {"platoon", "braking", "loss", "sim"}
    if unknown:
        raise ScenarioError(sorted(unknown)[0], "unknown section")

    params = _build(
        "platoon",
        _section(doc, "platoon"),
        PlatoonParams,
        {"n", "tau_d", "h", "r", "L", "k_p", "k_d", "T", "v0_init", "a0_init", "p_lead_init"},
    )
    brake = _build("braking", _section(doc, "braking"), BrakeParams, {"t_brake", "gamma", "eta"})
    loss = _build("loss", _section(doc, "loss"), LossModel, {"kind", "ell", "p", "seed"})

    sim = _section(doc, "sim")
    unknown = set(sim) - {"t_end", "rule", "alpha", "n_bar"}
    if unknown:
        raise ScenarioError(f"sim.{sorted(unknown)[0]}", "unknown field")
    if "t_end" not in sim:
        raise ScenarioError("sim.t_end", "missing field")
    try:
        rule = StepRule(
            kind=sim.get("rule", "theorem2"),
            alpha=sim.get("alpha", 1.0),
            n_bar=sim.get("n_bar", 100_000),
        )
    except ConfigurationError as exc:
        raise ScenarioError("sim", str(exc)) from exc
    try:
        return SimConfig(params=params, brake=brake, loss=loss, rule=rule, t_end=sim["t_end"])
    except ConfigurationError as exc:
        raise ScenarioError("sim.t_end", str(exc)) from exc


def load_scenario(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError("<file>", str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"invalid JSON: {exc}") from exc
    return scenario_from_dict(doc)
