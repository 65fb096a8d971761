"""
Main script for mixed K-stability scenario runs
"""
import argparse
import dataclasses
import logging
import os
import sys
from typing import List, Optional

from tqdm import tqdm

import config
from finite_level import basis_type_divisor_orders, convergence_report, delta_m, histogram_at_level, s_m
from invariants import (alpha_delta_over_candidates, lct_over_candidates, normalized_volume, ratio_table,
                        uniform_margin)
from report_writer import BETA_CURVE_COLUMNS, ReportWriter, beta_line, emit_beta_curve
from scenario import TASK_KINDS, Scenario, ScenarioError, Task, load_scenario, parse_task
from stability import (admissible_interval, ample_interval, beta_affine_form, destabilizer_search,
                       epsilon_lc_certificate, epsilon_zero, instability_threshold,
                       proportional_sufficient_check, semistable_interval, sufficient_alpha_verdict,
                       weighted_blowup_discrepancy, weighted_blowup_pullback)
from testconfig import df, df_from_beta, ding, fibre_lct, jna, stability_verdict

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_COMPUTATION = 2

# Subcommands that can be built from command-line flags alone
SYNTHESIZABLE = ('beta', 'interval', 'destabilize', 'alpha-delta')


def configure_logging(level: Optional[str] = None) -> None:
    """Log to config.LOG_FILE and stderr; stdout carries the report."""
    logging.basicConfig(
        level=getattr(logging, level or config.LOG_LEVEL),
        format='%(asctime)s | %(levelname)-8s | %(message)s',
        handlers=[
            logging.FileHandler(config.LOG_FILE),
            logging.StreamHandler(sys.stderr)
        ]
    )


class ScenarioRunner:
    """Evaluates a scenario's tasks and hands the results to a ReportWriter"""

    def __init__(self, scenario: Scenario, output_dir: str, precision: Optional[int] = None):
        self.scenario = scenario
        self.model = scenario.model
        self.writer = ReportWriter(output_dir, precision)

    def run(self, tasks: Optional[List[Task]] = None) -> str:
        tasks = self.scenario.tasks if tasks is None else tasks
        logger.info(f"Running {len(tasks)} task(s) of scenario {self.scenario.name}")
        for task in tqdm(tasks, desc=self.scenario.name, unit='task', file=sys.stderr,
                         disable=not tasks):
            handler = getattr(self, '_run_' + task.kind.replace('-', '_'))
            handler(task)
        return self.writer.write_report()

    def _title(self, task: Task, text: str) -> str:
        return f"[{task.index}] {text}"

    # -- invariants ---------------------------------------------------------

    def _run_beta(self, task: Task):
        lines = []
        for label in task.params['labels']:
            v = self.scenario.valuation(label)
            rows = emit_beta_curve(self.model, v, task.params['t_values'])
            lines.extend(beta_line(label, row['t'], row['beta']) for row in rows)
            self.writer.write_csv(f"{task.name}_{label}", rows, BETA_CURVE_COLUMNS)
        self.writer.add_section(self._title(task, f"beta on {self.model.label}"), lines)

    def _run_alpha_delta(self, task: Task):
        candidates = self.scenario.candidates(task.params['labels'])
        lines, rows = [], []
        for t in task.params['t_values']:
            table = ratio_table(self.model, candidates, t)
            rows.extend({'t': t, **row} for row in table)
            bounds = alpha_delta_over_candidates(self.model, candidates, t)
            lines.append(f"alpha_ub(t={t}) = {bounds.alpha_ub}")
            lines.append(f"delta_ub(t={t}) = {bounds.delta_ub}")
            margin = uniform_margin(self.model, candidates, t)
            lines.append(f"uniform margin(t={t}) = {'none (some beta < 0)' if margin is None else margin}")
            for v in candidates:
                if v.val_volume is not None:
                    lines.append(f"normalized volume({v.label}; t={t}) = {normalized_volume(v, t)}")
        self.writer.write_csv(task.name, rows, ['t', 'valuation', 'A', 'S', 'T', 'A_over_T', 'A_over_S'])
        self.writer.add_section(self._title(task, f"alpha/delta over {len(candidates)} candidates"), lines)

    # -- wall crossing ------------------------------------------------------

    def _run_interval(self, task: Task):
        candidates = self.scenario.candidates(task.params['labels'])
        ample = ample_interval(self.model)
        lines = [f"ample range: {ample}"]
        for v in candidates:
            form = beta_affine_form(v, self.model)
            admissible = admissible_interval(form, ample) if not ample.empty else ample
            lines.append(f"beta({v.label}; t) = {form}  ->  beta >= 0 on {admissible}")
        interval = semistable_interval(self.model, candidates)
        lines.append(f"semistable interval over {len(candidates)} candidates: {interval}")
        threshold = instability_threshold(self.model, candidates)
        if threshold is not None:
            lines.append(f"some candidate has beta < 0 for every ample t > {threshold}")
        checks = proportional_sufficient_check(self.model, candidates)
        for row in checks:
            if not row['holds']:
                lines.append(f"proportional criterion hypotheses violated by {row['valuation']}")
                break
        else:
            lines.append(f"proportional criterion hypotheses hold on all {len(checks)} candidates")
        self.writer.write_csv(task.name, checks, ['valuation', 'ambient_term', 'foliated_term', 'holds'])
        self.writer.add_section(self._title(task, "wall crossing"), lines)

    def _run_destabilize(self, task: Task):
        candidates = self.scenario.candidates(task.params['labels'])
        lines, rows = [], []
        for t in task.params['t_values']:
            verdict = destabilizer_search(self.model, candidates, t)
            lines.append(f"t={t}: {verdict.message}")
            rows.extend({'t': t, **report.as_row()} for report in verdict.reports)
        self.writer.write_csv(task.name, rows, ['t', 'valuation', 'A', 'S', 'T', 'j', 'beta'])
        self.writer.add_section(self._title(task, "destabilizer search"), lines)

    # -- finite level -------------------------------------------------------

    def _run_delta_m(self, task: Task):
        templates = task.params['templates']
        lines, rows = [], []
        for t in task.params['t_values']:
            c = self.model.h_coefficient(t)
            for m in task.params['m_list']:
                candidates = []
                for label, template in templates.items():
                    v = self.scenario.valuation(label)
                    hist = histogram_at_level(self.model.n, c, m, template)
                    candidates.append((v, hist))
                    rows.append({'t': t, 'm': m, 'valuation': label, 'N_m': hist.N_m, 'S_m': s_m(hist)})
                value = delta_m(t, self.model, candidates, m)
                via_lct = min(lct_over_candidates(t, basis_type_divisor_orders(v, hist)) for v, hist in candidates)
                if via_lct != value:
                    raise ArithmeticError(f"delta_m mismatch at m={m}: {value} != {via_lct}")
                lines.append(f"delta_{m}(t={t}) <= {value}")
        self.writer.write_csv(task.name, rows, ['t', 'm', 'valuation', 'N_m', 'S_m'])
        self.writer.add_section(self._title(task, "finite-level delta"), lines)

    def _run_convergence(self, task: Task):
        p = task.params
        table = convergence_report(p['template'], p['m_list'], n=p['n'], d=p['d'])
        rows = [dataclasses.asdict(row) for row in table]
        lines = [f"S_{row.m} = {row.S_m}  (|S_m - S| = {row.gap})" for row in table]
        self.writer.write_csv(task.name, rows, ['m', 'S_m', 'gap'])
        self.writer.add_section(
            self._title(task, f"S_m convergence, {p['template'].value} template on P^{p['n']}, L={p['d']}H"),
            lines)

    # -- test configurations ------------------------------------------------

    def _configuration_data(self, entry: dict):
        data = entry['data']
        if data.lct_along_fibre is None and entry['components']:
            data = dataclasses.replace(data, lct_along_fibre=fibre_lct(data.t, entry['components']))
        return data

    def _run_testconfig(self, task: Task, name: str, fn):
        lines, rows = [], []
        for entry in task.params['configurations']:
            data = self._configuration_data(entry)
            value = fn(data)
            lines.append(f"{name}({data.label}; t={data.t}) = {value}")
            row = {'configuration': data.label, 't': data.t, name: value}
            if entry['delta'] > 0 or data.lct_along_fibre is not None:
                verdict = stability_verdict(data, entry['delta'])
                row.update(dataclasses.asdict(verdict))
            rows.append(row)
        for label in task.params.get('rees_labels', []):
            v = self.scenario.valuation(label)
            for t in task.params['t_values']:
                check = df_from_beta(v, self.model, t)
                lines.append(f"DF(Rees({label}); t={t}) = beta = {check.df}")
        if rows:
            columns = ['configuration', 't', name, 'df_nonnegative', 'ding_nonnegative',
                       'df_uniform', 'ding_uniform']
            self.writer.write_csv(task.name, rows, columns)
        self.writer.add_section(self._title(task, f"{name} of test configurations"), lines)

    def _run_df(self, task: Task):
        self._run_testconfig(task, 'DF', df)

    def _run_ding(self, task: Task):
        self._run_testconfig(task, 'Ding', ding)

    def _run_jna(self, task: Task):
        self._run_testconfig(task, 'J^NA', jna)

    # -- boundedness --------------------------------------------------------

    def _run_blowup(self, task: Task):
        p = task.params
        lines, rows = [], []
        for t in p['t_values']:
            value = weighted_blowup_discrepancy(p['d'], p['r'], p['k'], p['b'], t, p['case'])
            row = {'t': t, 'discrepancy': value}
            line = f"A(weighted blow-up; t={t}) = {value}"
            if p['a'] is not None:
                pullback = weighted_blowup_pullback(p['d'], p['r'], p['k'], p['b'], t, p['case'], p['a'])
                row.update(pullback=pullback.value, bound_ok=pullback.bound_ok)
                line += f"; over a = {p['a']}: {pullback.value} (bound k*d = {p['k'] * p['d']} " \
                        f"{'holds' if pullback.bound_ok else 'FAILS'})"
            lines.append(line)
            rows.append(row)
        self.writer.write_csv(task.name, rows, ['t', 'discrepancy', 'pullback', 'bound_ok'])
        title = f"weighted blow-up, {p['case'].value}, d={p['d']}, r={p['r']}, k={p['k']}, b={p['b']}"
        self.writer.add_section(self._title(task, title), lines)

    def _run_certify(self, task: Task):
        p = task.params
        lines, rows = [], []
        for t in p['t_values']:
            V = p['V'] if p['V'] is not None else self.model.volume(t)
            eps0 = epsilon_zero(p['d'], V, p['delta'])
            eps = epsilon_lc_certificate(p['d'], V, p['delta'], t)
            lines.append(f"epsilon(d={p['d']}, V={V}, delta={p['delta']}, t={t}) = {eps}  (eps_0 = {eps0})")
            rows.append({'t': t, 'V': V, 'delta': p['delta'], 'eps_0': eps0, 'epsilon': eps})
        if p['alpha_lb'] is not None:
            verdict = sufficient_alpha_verdict(self.model.n, p['alpha_lb'])
            lines.append(f"alpha >= {p['alpha_lb']}: {verdict.value}")
        self.writer.write_csv(task.name, rows, ['t', 'V', 'delta', 'eps_0', 'epsilon'])
        self.writer.add_section(self._title(task, "epsilon-lc certificate"), lines)


def select_tasks(scenario: Scenario, command: str, args: argparse.Namespace) -> List[Task]:
    """Tasks of the requested kind, with --t/--t-grid/--m-list applied."""
    if command == 'run':
        tasks = scenario.tasks
    else:
        tasks = [task for task in scenario.tasks if task.kind == command]
        if not tasks:
            if command not in SYNTHESIZABLE:
                raise ScenarioError(f"scenario {scenario.name} has no {command} tasks")
            tasks = [Task(kind=command, params={}, index=len(scenario.tasks) + 1, source={'kind': command})]
    overrides = {}
    if args.t_grid:
        overrides['t_grid'] = args.t_grid
    elif args.t:
        overrides['t'] = args.t
    if args.m_list:
        overrides['m_list'] = args.m_list
    if not overrides and all(task.params for task in tasks):
        return tasks
    selected = []
    for task in tasks:
        block = dict(task.source)
        if 't_grid' in overrides or 't' in overrides:
            block.pop('t', None)
            block.pop('t_grid', None)
        block.update(overrides)
        selected.append(parse_task(block, task.index, scenario))
    return selected


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Mixed K-stability invariants of adjoint foliated structures')
    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in ('run',) + TASK_KINDS:
        help_text = 'Run every task of a scenario' if command == 'run' else f'Run the {command} tasks only'
        sub = subparsers.add_parser(command, help=help_text)
        sub.add_argument('scenario', help='Scenario JSON file or bundled scenario name')
        sub.add_argument('--t', help='Single parameter value p/q')
        sub.add_argument('--t-grid', dest='t_grid', help='Grid "a/b:c/d:step"')
        sub.add_argument('--m-list', dest='m_list', help='Levels "1,2,4,8"')
        sub.add_argument('--out', help='Output directory (default: REPORTS_DIR/<scenario>)')
        sub.add_argument('--precision', type=int, default=config.DECIMAL_PRECISION,
                         help='Decimal places in the CSV decimal columns')
    return parser


def run_cli(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        tasks = select_tasks(scenario, args.command, args)
    except ScenarioError as e:
        logger.error(f"Invalid scenario: {e}")
        return EXIT_VALIDATION
    output_dir = args.out or os.path.join(config.REPORTS_DIR, scenario.name)
    runner = ScenarioRunner(scenario, output_dir, precision=args.precision)
    try:
        report_path = runner.run(tasks)
    except ScenarioError as e:
        logger.error(f"Invalid scenario: {e}")
        return EXIT_VALIDATION
    except Exception as e:
        logger.error(f"Error while computing {scenario.name}: {e}", exc_info=True)
        return EXIT_COMPUTATION
    with open(report_path, 'r', encoding='utf-8') as f:
        sys.stdout.write(f.read())
    return EXIT_OK


def main():
    """Main entry point"""
    configure_logging()
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
