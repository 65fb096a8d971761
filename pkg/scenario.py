"""
Scenario files: one JSON document with the keys "model", "valuations" and
"tasks". Rationals travel as strings "p/q" (or plain integers); floats are
rejected so nothing inexact enters the computation.
"""
import json
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

import config
from exact_arith import as_rational
from finite_level import Template, level_degree
from model import (DiscrepancyData, FoliatedModel, ModelError, PolarizationRule, ValuationRecord,
                   VolumeScaling, divisor_class_valuation, explicit_valuation, hyperplane_valuation,
                   make_explicit_model, make_pn_model, make_proportional_model, point_blowup_valuation)
from stability import BlowupCase, TInterval, ample_interval
from testconfig import FibreComponent, TestConfigData

logger = logging.getLogger(__name__)

TASK_KINDS = ('beta', 'interval', 'destabilize', 'alpha-delta', 'delta-m', 'convergence',
              'df', 'ding', 'jna', 'blowup', 'certify')

# Task kinds evaluated on the scenario's model at given t values
T_TASKS = ('beta', 'destabilize', 'alpha-delta', 'delta-m')


class ScenarioError(ValueError):
    """Malformed scenario, undefined label or out-of-range t"""


@dataclass
class Task:
    kind: str
    params: Dict[str, Any]
    index: int
    source: Dict[str, Any] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return f"{self.index:02d}_{self.kind}"


@dataclass
class Scenario:
    name: str
    model: FoliatedModel
    valuations: Dict[str, ValuationRecord]
    tasks: List[Task] = field(default_factory=list)
    path: Optional[str] = None

    @property
    def ample_range(self) -> TInterval:
        if self.model.is_proportional:
            return ample_interval(self.model)
        return TInterval(Fraction(0), Fraction(1))

    def valuation(self, label: str) -> ValuationRecord:
        try:
            return self.valuations[label]
        except KeyError:
            raise ScenarioError(f"undefined valuation label {label!r}") from None

    def candidates(self, labels: Optional[List[str]] = None) -> List[ValuationRecord]:
        if labels is None:
            return list(self.valuations.values())
        return [self.valuation(label) for label in labels]

    def check_t(self, t: Fraction, where: str = "") -> Fraction:
        ample = self.ample_range
        if not ample.contains(t):
            raise ScenarioError(f"{where or 'task'}: t = {t} lies outside the ample range {ample}")
        return t


# ---------------------------------------------------------------------------
# Scalar parsers
# ---------------------------------------------------------------------------

def parse_rational(value: Any, where: str = "") -> Fraction:
    """'p/q', an integer string or an int. Floats and booleans are refused."""
    if isinstance(value, float):
        raise ScenarioError(f"{where}: float {value!r} is not exact; write it as a string 'p/q'")
    try:
        return as_rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ScenarioError(f"{where}: cannot read {value!r} as a rational ({e})") from None


def parse_t_grid(text: str) -> List[Fraction]:
    """'a/b:c/d:step' -> [a/b, a/b + step, ..., c/d], both ends included."""
    parts = str(text).split(':')
    if len(parts) != 3:
        raise ScenarioError(f"t-grid must look like 'start:stop:step', got {text!r}")
    start, stop, step = (parse_rational(p.strip(), "t-grid") for p in parts)
    if step <= 0:
        raise ScenarioError(f"t-grid step must be positive, got {step}")
    if start > stop:
        raise ScenarioError(f"t-grid start {start} exceeds stop {stop}")
    grid = []
    t = start
    while t <= stop:
        grid.append(t)
        t += step
    return grid


def parse_m_list(text: Any) -> List[int]:
    """'1,2,4,8' or a JSON list of integers."""
    items = text if isinstance(text, list) else str(text).split(',')
    levels = []
    for item in items:
        try:
            m = int(str(item).strip())
        except ValueError:
            raise ScenarioError(f"level {item!r} is not an integer") from None
        if m < 1 or m > config.MAX_LEVEL:
            raise ScenarioError(f"level m = {m} outside [1, {config.MAX_LEVEL}]")
        levels.append(m)
    if not levels:
        raise ScenarioError("empty m-list")
    return levels


def _require(block: dict, key: str, where: str) -> Any:
    if key not in block:
        raise ScenarioError(f"{where}: missing key {key!r}")
    return block[key]


def _optional_rational(block: dict, key: str, where: str) -> Optional[Fraction]:
    value = block.get(key)
    return None if value is None else parse_rational(value, f"{where}.{key}")


def _t_values(block: dict, where: str) -> List[Fraction]:
    if 't_grid' in block:
        return parse_t_grid(block['t_grid'])
    if 't' in block:
        values = block['t'] if isinstance(block['t'], list) else [block['t']]
        return [parse_rational(v, f"{where}.t") for v in values]
    raise ScenarioError(f"{where}: needs 't' or 't_grid'")


# ---------------------------------------------------------------------------
# Model and valuations
# ---------------------------------------------------------------------------

def parse_model(block: dict) -> FoliatedModel:
    if not isinstance(block, dict):
        raise ScenarioError("'model' must be an object")
    kind = block.get('type', 'pn')
    label = block.get('label', '')
    n = _require(block, 'n', 'model')
    if isinstance(n, bool) or not isinstance(n, int):
        raise ScenarioError(f"model.n must be an integer, got {n!r}")
    try:
        if kind == 'pn':
            return make_pn_model(
                n,
                parse_rational(_require(block, 'd_X', 'model'), 'model.d_X'),
                parse_rational(_require(block, 'd_F', 'model'), 'model.d_F'),
                hyperplane_degree=parse_rational(block.get('hyperplane_degree', 1), 'model.hyperplane_degree'),
                fixed_coefficient=_optional_rational(block, 'fixed_coefficient', 'model'),
                label=label,
            )
        if kind == 'proportional':
            try:
                rule = PolarizationRule(block.get('polarization', 'anti_adjoint'))
            except ValueError:
                raise ScenarioError(f"unknown polarization {block.get('polarization')!r}") from None
            return make_proportional_model(
                n,
                parse_rational(_require(block, 'V', 'model'), 'model.V'),
                parse_rational(_require(block, 'q', 'model'), 'model.q'),
                polarization=rule,
                polarization_ratio=parse_rational(block.get('polarization_ratio', 1), 'model.polarization_ratio'),
                label=label,
            )
        if kind == 'explicit':
            return make_explicit_model(
                n,
                parse_rational(_require(block, 'V', 'model'), 'model.V'),
                parse_rational(_require(block, 'mu_intercept', 'model'), 'model.mu_intercept'),
                parse_rational(block.get('mu_slope', 0), 'model.mu_slope'),
                label=label,
            )
    except ModelError as e:
        raise ScenarioError(f"model: {e}") from None
    raise ScenarioError(f"unknown model type {kind!r}")


def _epsilon(block: dict, where: str) -> int:
    eps = block.get('epsilon', 1)
    if eps not in (0, 1):
        raise ScenarioError(f"{where}: epsilon must be 0 or 1")
    return eps


def _invariant(block: dict, where: str) -> bool:
    flag = block.get('invariant', False)
    if not isinstance(flag, bool):
        raise ScenarioError(f"{where}: invariant must be true or false, got {flag!r}")
    return flag


def _dimension(block: dict, default: int, where: str) -> int:
    n = block.get('n', default)
    if isinstance(n, bool) or not isinstance(n, int):
        raise ScenarioError(f"{where}: n must be an integer, got {n!r}")
    return n


def parse_valuation(block: dict, model: FoliatedModel) -> ValuationRecord:
    label = _require(block, 'label', 'valuation')
    where = f"valuation {label!r}"
    template = _require(block, 'template', where)
    a_X = parse_rational(block.get('a_X', 0), f"{where}.a_X")
    a_F = parse_rational(block.get('a_F', 0), f"{where}.a_F")
    val_volume = _optional_rational(block, 'val_volume', where)
    try:
        if template == 'hyperplane':
            return hyperplane_valuation(model, invariant=_invariant(block, where),
                                        a_X=a_X, a_F=a_F, label=label, val_volume=val_volume)
        if template == 'divisor_class':
            return divisor_class_valuation(
                model, parse_rational(_require(block, 'class_multiple', where), f"{where}.class_multiple"),
                invariant=_invariant(block, where), a_X=a_X, a_F=a_F,
                label=label, val_volume=val_volume)
        if template == 'point':
            return point_blowup_valuation(
                model, a_X=a_X, a_F=a_F, epsilon=_epsilon(block, where), label=label,
                breakpoint=_optional_rational(block, 'breakpoint', where),
                val_volume=1 if val_volume is None else val_volume)
        if template == 'explicit':
            try:
                scaling = VolumeScaling(block.get('scaling', 'lambda'))
            except ValueError:
                raise ScenarioError(f"{where}: unknown scaling {block.get('scaling')!r}") from None
            breakpoints = [parse_rational(b, f"{where}.breakpoints") for b in _require(block, 'breakpoints', where)]
            pieces = [[parse_rational(c, f"{where}.coefficients") for c in piece]
                      for piece in _require(block, 'coefficients', where)]
            return explicit_valuation(label, a_X, a_F, _epsilon(block, where), breakpoints, pieces,
                                      n=_dimension(block, model.n, where), scaling=scaling,
                                      val_volume=val_volume, provenance=block.get('provenance', ''))
    except ModelError as e:
        raise ScenarioError(f"{where}: {e}") from None
    except ValueError as e:
        # PiecewisePoly validation failures
        raise ScenarioError(f"{where}: {e}") from None
    raise ScenarioError(f"{where}: unknown template {template!r}")


# ---------------------------------------------------------------------------
# Tasks
# ---------------------------------------------------------------------------

def _labels(block: dict, key: str, scenario: Scenario, where: str) -> Optional[List[str]]:
    labels = block.get(key)
    if labels is None:
        return None
    if isinstance(labels, str):
        labels = [labels]
    for label in labels:
        scenario.valuation(label)
    if not labels:
        raise ScenarioError(f"{where}: empty {key!r} list")
    return list(labels)


def _parse_configuration(block: dict, where: str) -> dict:
    label = block.get('label', where)
    where = f"{where} configuration {label!r}"
    components = []
    for c in block.get('fibre_components', []):
        comp_label = c.get('label', 'component')
        components.append(FibreComponent(
            discrepancy=DiscrepancyData(
                label=comp_label,
                a_X=parse_rational(c.get('a_X', 0), f"{where}.{comp_label}.a_X"),
                a_F=parse_rational(c.get('a_F', 0), f"{where}.{comp_label}.a_F"),
                epsilon=_epsilon(c, f"{where}.{comp_label}"),
            ),
            order_B=parse_rational(c.get('order_B', 0), f"{where}.{comp_label}.order_B"),
            order_fibre=parse_rational(_require(c, 'order_fibre', where), f"{where}.{comp_label}.order_fibre"),
        ))
    n = _require(block, 'n', where)
    if not isinstance(n, int):
        raise ScenarioError(f"{where}: n must be an integer")
    t = parse_rational(_require(block, 't', where), f"{where}.t")
    if not 0 <= t <= 1:
        raise ScenarioError(f"{where}: t = {t} outside [0, 1]")
    try:
        data = TestConfigData(
            n=n,
            V=parse_rational(_require(block, 'V', where), f"{where}.V"),
            mu=parse_rational(block.get('mu', 1), f"{where}.mu"),
            Lbar_pow=parse_rational(_require(block, 'Lbar_pow', where), f"{where}.Lbar_pow"),
            K_dot_L=parse_rational(block.get('K_dot_L', 0), f"{where}.K_dot_L"),
            t=t,
            L_mu_pullback=parse_rational(block.get('L_mu_pullback', 0), f"{where}.L_mu_pullback"),
            lct_along_fibre=_optional_rational(block, 'lct_along_fibre', where),
            label=label,
        )
    except ValueError as e:
        raise ScenarioError(f"{where}: {e}") from None
    return {'data': data, 'components': components,
            'delta': parse_rational(block.get('delta', 0), f"{where}.delta")}


def parse_task(block: dict, index: int, scenario: Scenario) -> Task:
    kind = _require(block, 'kind', f"task #{index}")
    if kind not in TASK_KINDS:
        raise ScenarioError(f"task #{index}: unknown kind {kind!r}")
    where = f"task #{index} ({kind})"
    params: Dict[str, Any] = {}

    if kind in T_TASKS:
        params['t_values'] = [scenario.check_t(t, where) for t in _t_values(block, where)]

    if kind == 'beta':
        params['labels'] = _labels(block, 'valuations', scenario, where) or list(scenario.valuations)
    elif kind in ('interval', 'destabilize', 'alpha-delta'):
        params['labels'] = _labels(block, 'candidates', scenario, where) or list(scenario.valuations)
        if not params['labels']:
            raise ScenarioError(f"{where}: empty candidate set")
        if kind == 'interval' and not scenario.model.is_proportional:
            raise ScenarioError(f"{where}: interval needs a proportional model")
    elif kind == 'delta-m':
        templates = _require(block, 'templates', where)
        if not isinstance(templates, dict) or not templates:
            raise ScenarioError(f"{where}: 'templates' must map valuation labels to templates")
        try:
            params['templates'] = {label: Template(name) for label, name in templates.items()}
        except ValueError as e:
            raise ScenarioError(f"{where}: {e}") from None
        for label in params['templates']:
            scenario.valuation(label)
        model = scenario.model
        if not model.is_projective_space_type or model.hyperplane_degree != 1:
            raise ScenarioError(f"{where}: section counting needs a P^n model with H^n = 1")
        params['m_list'] = parse_m_list(_require(block, 'm_list', where))
        for t in params['t_values']:
            for m in params['m_list']:
                try:
                    level_degree(model.h_coefficient(t), m)
                except ValueError as e:
                    raise ScenarioError(f"{where}: t = {t}: {e}") from None
    elif kind == 'convergence':
        try:
            params['template'] = Template(_require(block, 'template', where))
        except ValueError as e:
            raise ScenarioError(f"{where}: {e}") from None
        params['m_list'] = parse_m_list(_require(block, 'm_list', where))
        params['n'] = block.get('n', 2)
        params['d'] = parse_rational(block.get('d', 3), f"{where}.d")
    elif kind in ('df', 'ding', 'jna'):
        configurations = block.get('configurations', [])
        params['configurations'] = [_parse_configuration(c, where) for c in configurations]
        params['rees_labels'] = _labels(block, 'rees_valuations', scenario, where) or []
        if params['rees_labels']:
            params['t_values'] = [scenario.check_t(t, where) for t in _t_values(block, where)]
        if not params['configurations'] and not params['rees_labels']:
            raise ScenarioError(f"{where}: nothing to evaluate")
    elif kind == 'blowup':
        try:
            params['case'] = BlowupCase(block.get('case', 'transverse'))
        except ValueError as e:
            raise ScenarioError(f"{where}: {e}") from None
        for key in ('d', 'r'):
            params[key] = _require(block, key, where)
            if not isinstance(params[key], int):
                raise ScenarioError(f"{where}: {key} must be an integer")
        params['k'] = parse_rational(_require(block, 'k', where), f"{where}.k")
        params['b'] = parse_rational(_require(block, 'b', where), f"{where}.b")
        params['t_values'] = _t_values(block, where)
        if any(not 0 <= t <= 1 for t in params['t_values']):
            raise ScenarioError(f"{where}: t must lie in [0, 1]")
        params['a'] = _optional_rational(block, 'a', where)
    elif kind == 'certify':
        d = block.get('d', scenario.model.n)
        if not isinstance(d, int) or d < 1:
            raise ScenarioError(f"{where}: d must be a positive integer")
        params['d'] = d
        params['t_values'] = _t_values(block, where)
        if any(not 0 < t < 1 for t in params['t_values']):
            raise ScenarioError(f"{where}: the certificate needs 0 < t < 1")
        params['t_values'] = [scenario.check_t(t, where) for t in params['t_values']]
        params['V'] = _optional_rational(block, 'V', where)
        params['delta'] = _optional_rational(block, 'delta', where) or Fraction(1, d + 1)
        params['alpha_lb'] = _optional_rational(block, 'alpha_lb', where)

    return Task(kind=kind, params=params, index=index, source=dict(block))


def resolve_scenario_path(name_or_path: str) -> str:
    """A file path, or the name of a bundled scenario under SCENARIOS_DIR."""
    if os.path.isfile(name_or_path):
        return name_or_path
    if name_or_path in config.BUNDLED_SCENARIOS:
        return os.path.join(config.SCENARIOS_DIR, f"{name_or_path}.json")
    raise ScenarioError(f"no scenario file or bundled scenario named {name_or_path!r}")


def build_scenario(document: dict, name: str = "scenario", path: Optional[str] = None) -> Scenario:
    if not isinstance(document, dict):
        raise ScenarioError("scenario must be a JSON object")
    model = parse_model(_require(document, 'model', name))
    scenario = Scenario(name=document.get('name', name), model=model, valuations={}, path=path)
    for block in document.get('valuations', []):
        record = parse_valuation(block, model)
        if record.label in scenario.valuations:
            raise ScenarioError(f"duplicate valuation label {record.label!r}")
        try:
            record.check_against(model)
        except ModelError as e:
            raise ScenarioError(str(e)) from None
        scenario.valuations[record.label] = record
    tasks = document.get('tasks', [])
    if not isinstance(tasks, list):
        raise ScenarioError("'tasks' must be a list")
    scenario.tasks = [parse_task(block, i + 1, scenario) for i, block in enumerate(tasks)]
    logger.info(f"loaded scenario {scenario.name}: {len(scenario.valuations)} valuations, "
                f"{len(scenario.tasks)} tasks")
    return scenario


def load_scenario(name_or_path: str) -> Scenario:
    path = resolve_scenario_path(name_or_path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except OSError as e:
        raise ScenarioError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path} is not valid JSON: {e}") from None
    default_name = os.path.splitext(os.path.basename(path))[0]
    return build_scenario(document, name=default_name, path=path)
