"""
Punto de entrada CLI para qdecide.
Maneja los argumentos de línea de comandos y ejecuta las operaciones correspondientes.

Códigos de salida: 0 éxito o verificación superada, 1 verificación fallida,
2 error de uso.
"""

import argparse
import configparser
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from constants.information import (
    CSV_SCHEMA_LINE,
    PARSER_DESCRIPTION,
    QDECIDE_NAME,
    QDECIDE_VERSION,
)
from constants.tolerances import (
    MAX_COMPARE_PARTICLES,
    MAX_PARTICLES,
    MAX_TREE_PARTICLES,
    OPTIMALITY_TOL,
)
from core.decision import (
    BinaryProblem,
    Pom,
    binary_bayes_cost_eigen,
    binary_optimal_pom,
    check_optimality,
    combined_cost_closed,
    expected_cost,
    prior_only_cost,
    risk_operators,
)
from core.exceptions import QDecideError
from core.montecarlo import SimulationConfig, analytic_cost, simulate
from core.sequential import (
    Partition,
    compositions,
    distinct_posteriors,
    enumerate_tree,
    fixed_angle_cost,
    partition_cost,
    policy_angles,
    sequential_cost_closed,
    tree_cost,
)
from core.states import symmetric_angles
from utils.config import load_config_file, setup_logging, worker_count
from utils.output import OutputRecord, emit, format_number

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Argumentos válidos para argparse pero fuera de dominio."""


class Cli:
    args: argparse.Namespace = None
    parser: argparse.ArgumentParser = None
    subparsers: dict = None

    def __init__(self, argv=None):
        self.parser = argparse.ArgumentParser(prog=QDECIDE_NAME, description=PARSER_DESCRIPTION)
        self.subparsers = {}
        self._init_parser()
        argv = list(sys.argv[1:] if argv is None else argv)
        self._apply_config_file(argv)
        self.args = self.parser.parse_args(argv)
        self._convert_degrees()

    # ------------------------------------------------------------------
    # Construcción del parser
    # ------------------------------------------------------------------

    def _common_parent(self) -> argparse.ArgumentParser:
        parent = argparse.ArgumentParser(add_help=False)
        parent.add_argument("--config", help="Archivo clave = valor con valores por defecto")
        parent.add_argument("-v", "--verbose", help="Mensajes de depuración", action="store_true")
        return parent

    def _problem_parent(self) -> argparse.ArgumentParser:
        parent = argparse.ArgumentParser(add_help=False)
        parent.add_argument("--xi", type=float, help="Probabilidad a priori de θ₁")
        parent.add_argument("--delta", type=float, help="Semiángulo δ, |θ₂ - θ₁| = 2δ")
        parent.add_argument("--theta1", type=float, help="Polarización de la hipótesis 1")
        parent.add_argument("--theta2", type=float, help="Polarización de la hipótesis 2")
        parent.add_argument("--n", type=int, help="Número de partículas N")
        parent.add_argument(
            "--degrees", help="Los ángulos se dan en grados", action="store_true"
        )
        return parent

    def _add_command(self, commands, name, help_text, parents, handler):
        sub = commands.add_parser(name, help=help_text, parents=parents)
        sub.set_defaults(handler=handler)
        self.subparsers[name] = sub
        return sub

    def _init_parser(self) -> None:
        self.parser.add_argument(
            "--version", action="version", version=f"{QDECIDE_NAME} {QDECIDE_VERSION}"
        )
        commands = self.parser.add_subparsers(dest="command", required=True)
        common = self._common_parent()
        problem = self._problem_parent()

        cost = self._add_command(
            commands, "cost", "Coste de Bayes de un problema", [common, problem], self._cmd_cost
        )
        cost.add_argument(
            "--method", choices=("closed", "eigen", "tree", "all"), default="closed",
            help="Ruta de cálculo",
        )
        cost.add_argument("--format", choices=("csv", "json"), default="csv")

        sweep = self._add_command(
            commands, "sweep", "Barrido de costes sobre una rejilla", [common], self._cmd_sweep
        )
        sweep.add_argument(
            "--xi-range", type=float, nargs=3, metavar=("INICIO", "FIN", "PASOS"),
            help="Rejilla de ξ (extremos incluidos)",
        )
        sweep.add_argument(
            "--delta-range", type=float, nargs=3, metavar=("INICIO", "FIN", "PASOS"),
            help="Rejilla de δ en radianes (extremos incluidos)",
        )
        sweep.add_argument(
            "--n-range", type=int, nargs=2, metavar=("INICIO", "FIN"),
            help="Rango de N (extremos incluidos)",
        )
        sweep.add_argument("--method", choices=("closed", "eigen", "tree"), default="closed")
        sweep.add_argument("--degrees", action="store_true")
        sweep.add_argument("--format", choices=("csv", "json"), default="csv")

        compare = self._add_command(
            commands, "compare", "Compara estrategias por grupos", [common, problem], self._cmd_compare
        )
        compare.add_argument(
            "--partitions", default="all",
            help="'all' o lista separada por ';' (p. ej. '2,1;1,1,1')",
        )
        compare.add_argument("--format", choices=("csv", "json"), default="csv")

        verify = self._add_command(
            commands, "verify", "Comprueba la optimalidad de una medida", [common, problem], self._cmd_verify
        )
        verify.add_argument(
            "--pom", choices=("optimal", "always-first", "always-second"), default="optimal"
        )
        verify.add_argument("--tol", type=float, default=OPTIMALITY_TOL)
        verify.add_argument("--format", choices=("text", "json"), default="text")

        simulate_cmd = self._add_command(
            commands, "simulate", "Simulación de Monte Carlo", [common, problem], self._cmd_simulate
        )
        simulate_cmd.add_argument(
            "--partition", default="sequential",
            help="'sequential', 'combined' o tamaños de grupo (p. ej. '2,1')",
        )
        simulate_cmd.add_argument("--trials", type=int, default=100000)
        simulate_cmd.add_argument("--seed", type=int, default=0)
        simulate_cmd.add_argument("--format", choices=("csv", "json"), default="json")

        tree = self._add_command(
            commands, "tree", "Árbol de posteriores de la medición secuencial", [common, problem], self._cmd_tree
        )
        tree.add_argument("--format", choices=("csv", "json"), default="csv")

    def _apply_config_file(self, argv) -> None:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        if not known.config:
            return
        try:
            values = load_config_file(known.config)
        except (OSError, ValueError, configparser.Error) as e:
            self.parser.error(f"no se pudo leer {known.config}: {e}")
        for sub in self.subparsers.values():
            defaults = {}
            for action in sub._actions:
                if action.dest not in values:
                    continue
                defaults[action.dest] = self._convert_config_value(sub, action, values[action.dest])
            sub.set_defaults(**defaults)

    @staticmethod
    def _convert_config_value(sub, action, raw):
        if action.nargs == 0:
            return raw.lower() in ("1", "true", "yes", "on")
        convert = action.type or str
        try:
            if isinstance(action.nargs, int):
                parts = raw.split()
                if len(parts) != action.nargs:
                    raise ValueError(f"se esperaban {action.nargs} valores")
                return [convert(p) for p in parts]
            return convert(raw)
        except ValueError as e:
            sub.error(f"valor inválido para '{action.dest}' en el archivo de configuración: {e}")

    def _convert_degrees(self) -> None:
        if not getattr(self.args, "degrees", False):
            return
        for name in ("delta", "theta1", "theta2"):
            value = getattr(self.args, name, None)
            if value is not None:
                setattr(self.args, name, math.radians(value))
        rng = getattr(self.args, "delta_range", None)
        if rng is not None:
            self.args.delta_range = [math.radians(rng[0]), math.radians(rng[1]), rng[2]]

    # ------------------------------------------------------------------
    # Validación
    # ------------------------------------------------------------------

    def _problem(self) -> BinaryProblem:
        args = self.args
        if args.xi is None:
            raise UsageError("falta --xi")
        if not 0.0 <= args.xi <= 1.0:
            raise UsageError(f"--xi debe estar en [0, 1]: {args.xi}")
        if args.n is None:
            raise UsageError("falta --n")
        if args.n < 1:
            raise UsageError(f"--n debe ser >= 1: {args.n}")
        if args.theta1 is not None and args.theta2 is not None:
            theta1, theta2 = args.theta1, args.theta2
        elif args.delta is not None:
            if not 0.0 <= args.delta <= math.pi / 2 + 1e-9:
                raise UsageError(f"--delta debe estar en [0, π/2]: {args.delta}")
            theta1, theta2 = symmetric_angles(min(args.delta, math.pi / 2))
        else:
            raise UsageError("indique --delta o bien --theta1 y --theta2")
        return BinaryProblem(theta1, theta2, args.xi, args.n)

    @staticmethod
    def _grid(values, name):
        start, stop, steps = values
        if steps != int(steps) or steps < 1:
            raise UsageError(f"{name}: el número de pasos debe ser un entero >= 1")
        if stop < start:
            raise UsageError(f"{name}: rango vacío")
        if int(steps) == 1:
            return [float(start)]
        return [float(v) for v in np.linspace(start, stop, int(steps))]

    def _record(self, problem, strategy, cost, method, **extra) -> OutputRecord:
        return OutputRecord(
            problem.prior_xi, problem.delta, problem.n_particles, strategy, cost, method, extra
        )

    # ------------------------------------------------------------------
    # Comandos
    # ------------------------------------------------------------------

    def _cost_records(self, problem: BinaryProblem, method: str):
        xi, delta, n = problem.prior_xi, problem.delta, problem.n_particles
        records = []
        if method in ("closed", "all"):
            records.append(self._record(problem, "combined", combined_cost_closed(xi, delta, n), "closed"))
        if method == "all":
            records.append(self._record(problem, "sequential", sequential_cost_closed(xi, delta, n), "closed"))
        if method == "eigen" or (method == "all" and n <= MAX_PARTICLES):
            records.append(self._record(problem, "combined", binary_bayes_cost_eigen(problem), "eigen"))
        elif method == "all":
            logger.warning("N = %d supera el límite de la representación densa; se omite eigen", n)
        if method in ("tree", "all"):
            if n <= MAX_TREE_PARTICLES:
                cost = tree_cost(xi, problem.theta1, problem.theta2, n)
                records.append(self._record(problem, "sequential", cost, "tree"))
            elif method == "tree":
                raise UsageError(f"--method tree admite N <= {MAX_TREE_PARTICLES}")
            else:
                logger.warning("N = %d supera el límite del árbol; se omite", n)
        if method == "all":
            records.append(self._record(problem, "prior", prior_only_cost(xi), "closed"))
        return records

    def _cmd_cost(self) -> int:
        problem = self._problem()
        emit(self._cost_records(problem, self.args.method), self.args.format, sys.stdout)
        return 0

    def _cmd_sweep(self) -> int:
        args = self.args
        if args.xi_range is None or args.delta_range is None or args.n_range is None:
            raise UsageError("sweep necesita --xi-range, --delta-range y --n-range")
        xis = self._grid(args.xi_range, "--xi-range")
        deltas = self._grid(args.delta_range, "--delta-range")
        n_start, n_stop = args.n_range
        if n_start < 1 or n_stop < n_start:
            raise UsageError("--n-range: rango vacío o N < 1")
        if any(not 0.0 <= x <= 1.0 for x in xis):
            raise UsageError("--xi-range debe estar contenido en [0, 1]")
        if any(not 0.0 <= d <= math.pi / 2 + 1e-9 for d in deltas):
            raise UsageError("--delta-range debe estar contenido en [0, π/2]")
        if args.method == "tree" and n_stop > MAX_TREE_PARTICLES:
            raise UsageError(f"--method tree admite N <= {MAX_TREE_PARTICLES}")

        cells = [
            BinaryProblem.from_delta(xi, min(delta, math.pi / 2), n)
            for xi in xis
            for delta in deltas
            for n in range(n_start, n_stop + 1)
        ]
        with ThreadPoolExecutor(max_workers=worker_count()) as executor:
            batches = list(executor.map(lambda p: self._cost_records(p, args.method), cells))
        records = sorted((r for batch in batches for r in batch), key=OutputRecord.sort_key)
        emit(records, args.format, sys.stdout)
        return 0

    def _cmd_compare(self) -> int:
        args = self.args
        problem = self._problem()
        n = problem.n_particles
        if args.partitions.strip() == "all":
            if n > MAX_COMPARE_PARTICLES:
                raise UsageError(f"--partitions all admite N <= {MAX_COMPARE_PARTICLES}")
            partitions = list(compositions(n))
        else:
            partitions = [
                Partition.parse(text, n) for text in args.partitions.split(";") if text.strip()
            ]
        xi, theta1, theta2 = problem.prior_xi, problem.theta1, problem.theta2
        combined = combined_cost_closed(xi, problem.delta, n)
        records = []
        for partition in partitions:
            cost = partition_cost(xi, theta1, theta2, partition)
            records.append(self._record(problem, str(partition), cost, "partition", gap=cost - combined))
        phi = float(policy_angles(xi, theta1, theta2))
        fixed = fixed_angle_cost(xi, theta1, theta2, phi, n)
        records.append(self._record(problem, "fixed", fixed, "closed", gap=fixed - combined))
        emit(records, args.format, sys.stdout, extra_fields=("gap",))
        worst = min(r.extra["gap"] for r in records)
        logger.info("Brecha mínima frente a la medición combinada: %s", format_number(worst))
        return 0

    def _cmd_verify(self) -> int:
        args = self.args
        problem = self._problem()
        hypotheses = problem.hypotheses()
        risks = risk_operators(hypotheses, problem.costs)
        dim = problem.n_particles + 1
        identity, zero = np.eye(dim), np.zeros((dim, dim))
        if args.pom == "always-first":
            pom = Pom((identity, zero))
        elif args.pom == "always-second":
            pom = Pom((zero, identity))
        elif 0.0 < problem.prior_xi < 1.0:
            pom = binary_optimal_pom(hypotheses[0].state, hypotheses[1].state, problem.prior_xi)
        else:
            pom = Pom((identity, zero)) if problem.prior_xi >= 0.5 else Pom((zero, identity))

        report = check_optimality(risks, pom, args.tol)
        cost = expected_cost(hypotheses, problem.costs, pom)
        if args.format == "json":
            json.dump(
                {
                    "xi": problem.prior_xi,
                    "delta_rad": problem.delta,
                    "n": problem.n_particles,
                    "pom": args.pom,
                    "upsilon_asymmetry": report.upsilon_asymmetry,
                    "min_eigenvalue_excess": list(report.min_eigenvalue_excess),
                    "expected_cost": cost,
                    "is_optimal": report.is_optimal,
                },
                sys.stdout,
                indent=2,
            )
            sys.stdout.write("\n")
        else:
            lines = [
                f"pom={args.pom}",
                f"upsilon_asymmetry={format_number(report.upsilon_asymmetry)}",
            ]
            for j, excess in enumerate(report.min_eigenvalue_excess, start=1):
                lines.append(f"min_eigenvalue_excess_{j}={format_number(excess)}")
            lines.append(f"expected_cost={format_number(cost)}")
            lines.append(f"verdict={'optimal' if report.is_optimal else 'not-optimal'}")
            sys.stdout.write("\n".join(lines) + "\n")
        return 0 if report.is_optimal else 1

    def _cmd_simulate(self) -> int:
        args = self.args
        problem = self._problem()
        strategy = Partition.parse(args.partition, problem.n_particles)
        if args.trials < 1:
            raise UsageError("--trials debe ser >= 1")
        config = SimulationConfig(problem, strategy, args.trials, args.seed)
        result = simulate(config, workers=worker_count())
        analytic = analytic_cost(problem, strategy)
        record = self._record(
            problem,
            str(strategy),
            result.error_rate,
            "montecarlo",
            standard_error=result.standard_error,
            analytic_cost=analytic,
            z_score=result.z_score(analytic),
            trials=result.trials,
            seed=int(args.seed),
            error_rate_h1=result.per_hypothesis_error[0],
            error_rate_h2=result.per_hypothesis_error[1],
        )
        emit(
            [record],
            args.format,
            sys.stdout,
            extra_fields=(
                "standard_error", "analytic_cost", "z_score", "trials", "seed",
                "error_rate_h1", "error_rate_h2",
            ),
        )
        return 0

    def _cmd_tree(self) -> int:
        args = self.args
        problem = self._problem()
        n = problem.n_particles
        if n > MAX_TREE_PARTICLES:
            raise UsageError(f"tree admite N <= {MAX_TREE_PARTICLES}")
        tree = enumerate_tree(problem.prior_xi, problem.theta1, problem.theta2, n)
        counts = [len(distinct_posteriors(tree.branches, depth)) for depth in range(1, n + 1)]
        out = sys.stdout
        if args.format == "json":
            json.dump(
                {
                    "xi": problem.prior_xi,
                    "delta_rad": problem.delta,
                    "n": n,
                    "cost": tree.cost,
                    "distinct_posteriors": counts,
                    "branches": [
                        {
                            "depth": b.depth,
                            "outcomes": b.outcome_string,
                            "weight": b.weight,
                            "posterior": b.posterior,
                            "phi_sequence_hash": b.angle_hash(),
                        }
                        for b in tree.branches
                    ],
                },
                out,
                indent=2,
            )
            out.write("\n")
            return 0
        out.write(CSV_SCHEMA_LINE + "\n")
        out.write("depth,outcomes,weight,posterior,phi_sequence_hash\n")
        for b in tree.branches:
            out.write(
                f"{b.depth},{b.outcome_string},{format_number(b.weight)},"
                f"{format_number(b.posterior)},{b.angle_hash()}\n"
            )
        out.write(f"# cost,{format_number(tree.cost)}\n")
        out.write(f"# distinct_posteriors,{';'.join(str(c) for c in counts)}\n")
        return 0

    def main(self) -> int:
        """Función principal de la interfaz de línea de comandos."""
        setup_logging(self.args.verbose)
        try:
            return self.args.handler()
        except (UsageError, QDecideError) as e:
            sys.stderr.write(f"{QDECIDE_NAME} {self.args.command}: error: {e}\n")
            return 2
