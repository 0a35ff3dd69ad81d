"""Command-line front end.

Exit codes: 0 accept-type verdict (EMPTY, M_SPARSE, or plain success),
1 reject-type verdict, 2 usage or I/O error, 3 capability error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, dense
from .bounds import identity_prob_bounds, kl_divergence, kl_lower_bound, t_star
from .emptiness import test_intolerant, test_tolerant
from .errors import CapabilityError, DomainError
from .learner import LearnerConfig, hierarchical_learn
from .oracle import EvolutionOracle
from .pauli import PauliHamiltonian, frobenius_norm, random_sparse_hamiltonian, spectral_norm
from .sparsity import test_sparsity, trotter_error_bound, trotter_error_exact

EXIT_ACCEPT, EXIT_REJECT, EXIT_USAGE, EXIT_CAPABILITY = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _load(path: str) -> PauliHamiltonian:
    try:
        return PauliHamiltonian.from_json(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{path} is not a valid Hamiltonian document: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _require(args, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} requires {', '.join(missing)}")


def _trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def _fan_out(fn, items, threads: int) -> list:
    # Results come back in input order, so output is independent of scheduling.
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- commands ----------------------------------------------------------------


def cmd_gen(args) -> int:
    _require(args, "n", "M")
    lo, hi = args.magnitude
    h = random_sparse_hamiltonian(args.n, args.M, (lo, hi), np.random.default_rng(args.seed))
    text = h.to_json(indent=2) + "\n"
    _emit(text, args.out)
    return EXIT_ACCEPT


def cmd_test_empty(args) -> int:
    _require(args, "hamiltonian", "spectral_bound", "delta")
    h = _load(args.hamiltonian)
    oracle = EvolutionOracle(h, np.random.default_rng(args.seed))
    if args.mode == "intolerant":
        _require(args, "epsilon")
        result = test_intolerant(oracle, args.spectral_bound, args.epsilon, args.delta)
    else:
        _require(args, "epsilon1", "epsilon2")
        if args.epsilon1 >= args.epsilon2:
            raise UsageError("tolerant mode needs --epsilon1 < --epsilon2")
        result = test_tolerant(oracle, args.spectral_bound, args.epsilon1, args.epsilon2, args.delta)
    _emit(result.to_json(indent=2) + "\n", args.out)
    return EXIT_ACCEPT if result.empty else EXIT_REJECT


def cmd_learn(args) -> int:
    _require(args, "hamiltonian", "M", "epsilon", "delta")
    truth = _load(args.hamiltonian)
    oracle = EvolutionOracle(truth, np.random.default_rng(args.seed))
    learned = hierarchical_learn(oracle, LearnerConfig(args.M, args.epsilon, args.delta))
    h = learned.hamiltonian
    paulis = set(truth.support) | set(h.support)
    linf = max((abs(truth.coefficient(p) - h.coefficient(p)) for p in paulis), default=0.0)
    if args.out:
        _emit(learned.to_json(indent=2) + "\n", args.out)
    if args.ledger:
        _emit(learned.ledger_csv(), args.ledger)
    summary = _csv(
        ["terms", "candidates", "total_time", "queries", "linf_error", "support_recovered"],
        [[len(h), learned.candidates, _fmt(learned.ledger["total_time"]), learned.ledger["queries"], _fmt(linf), _fmt(set(h.support) == set(truth.support))]],
    )
    sys.stdout.write(summary)
    return EXIT_ACCEPT


def cmd_test_sparse(args) -> int:
    _require(args, "hamiltonian", "M", "epsilon", "spectral_bound", "delta")
    h = _load(args.hamiltonian)
    oracle = EvolutionOracle(h, np.random.default_rng(args.seed))
    result = test_sparsity(oracle, args.M, args.epsilon, args.spectral_bound, args.delta)
    _emit(result.to_json(indent=2) + "\n", args.out)
    return EXIT_ACCEPT if result.sparse else EXIT_REJECT


VERIFY_HEADER = ["check", "trial", "value", "bound", "bound_satisfied"]


def _verify_trial(rng: np.random.Generator) -> list[list]:
    """One instance of each bound check, evaluated exactly."""
    rows = []
    n = int(rng.integers(1, 4))

    # Identity-probability envelope at an admissible time.
    h = random_sparse_hamiltonian(n, int(rng.integers(1, min(4, 4**n - 1) + 1)), (0.1, 1.0), rng)
    big_l = spectral_norm(h)
    c = float(rng.uniform(0.01, 0.49))
    t = float(rng.uniform(0.0, 1.0)) * t_star(c) / (2.0 * big_l)
    lower, upper = identity_prob_bounds(frobenius_norm(h), t, c)
    p_id = dense.identity_probability_exact(h, t)
    rows.append(["identity_lower", p_id, lower, p_id >= lower - 1e-12])
    rows.append(["identity_upper", p_id, upper, p_id <= upper + 1e-12])

    # Trotter error of the interleaved circuit.
    h_hat = random_sparse_hamiltonian(n, int(rng.integers(1, min(4, 4**n - 1) + 1)), (0.1, 1.0), rng)
    steps = int(rng.integers(1, 17))
    dt = float(rng.uniform(0.01, 1.0)) / steps
    exact = trotter_error_exact(h, h_hat, dt, steps)
    bound = trotter_error_bound(steps * dt, steps, frobenius_norm(h_hat), big_l)
    rows.append(["trotter", exact, bound, exact <= bound + 1e-12])

    # Quadratic lower bound on the Bernoulli divergence.
    x, y = (float(v) for v in rng.uniform(0.01, 0.99, size=2))
    rows.append(["kl", kl_lower_bound(x, y), kl_divergence(x, y), kl_lower_bound(x, y) <= kl_divergence(x, y) + 1e-15])

    # Bell-state norm against the explicit maximally entangled state.
    dim = 1 << n
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    phi = np.eye(dim).reshape(-1) / math.sqrt(dim)
    explicit = float(np.linalg.norm(np.kron(a, np.eye(dim)) @ phi))
    got = dense.bell_state_norm(a)
    rows.append(["bell_norm", got, explicit, abs(got - explicit) < 1e-12])
    return rows


def cmd_verify_bounds(args) -> int:
    trials = args.trials if args.trials is not None else 20
    if trials < 0:
        raise UsageError("--trials must be nonnegative")
    per_trial = _fan_out(_verify_trial, _trial_rngs(args.seed, trials), args.threads)
    rows = []
    for k, trial_rows in enumerate(per_trial):
        for check, value, bound, ok in trial_rows:
            rows.append([check, k, _fmt(float(value)), _fmt(float(bound)), _fmt(bool(ok))])
    _emit(_csv(VERIFY_HEADER, rows), args.out)
    return EXIT_ACCEPT if all(r[-1] == "true" for r in rows) else EXIT_REJECT


SCALING_HEADER = ["point", "mean_total_time", "std_total_time", "trials"]


def _parse_grid(text: str, cast) -> list:
    try:
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --grid value: {exc}") from exc


def cmd_scaling(args) -> int:
    trials = args.trials if args.trials is not None else 5
    n = args.n if args.n is not None else 5
    delta = args.delta if args.delta is not None else 0.1
    if args.sweep == "epsilon":
        grid = _parse_grid(args.grid or "0.2,0.1,0.05,0.025", float)
        fixed_m = args.M if args.M is not None else 3
        points = [(fixed_m, e) for e in grid]
    else:
        grid = _parse_grid(args.grid or "2,3,4,5", int)
        fixed_eps = args.epsilon if args.epsilon is not None else 0.1
        points = [(m, fixed_eps) for m in grid]

    def run(job):
        (m, eps), rng = job
        h = random_sparse_hamiltonian(n, m, (0.1, 1.0), rng)
        learned = hierarchical_learn(EvolutionOracle(h, rng), LearnerConfig(m, eps, delta))
        return learned.ledger["total_time"]

    rows = []
    for k, (point, value) in enumerate(zip(points, grid)):
        # Same seeds at every grid point, so the sweep compares like with like.
        jobs = [(point, rng) for rng in _trial_rngs(args.seed, trials)]
        times = np.array(_fan_out(run, jobs, args.threads), dtype=float)
        mean = float(times.mean()) if times.size else float("nan")
        std = float(times.std(ddof=1)) if times.size > 1 else 0.0
        rows.append([_fmt(value), _fmt(mean), _fmt(std), trials])
    _emit(_csv(SCALING_HEADER, rows), args.out)
    return EXIT_ACCEPT


# -- parser ------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamlearn", description="Bell-sampling Hamiltonian testing and learning.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random sparse Hamiltonian")
    p.add_argument("--n", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--magnitude", type=float, nargs=2, default=(0.1, 1.0), metavar=("LO", "HI"))
    _common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("test-empty", help="emptiness test a Hamiltonian file")
    p.add_argument("--hamiltonian", metavar="PATH")
    p.add_argument("--mode", choices=("intolerant", "tolerant"), default="intolerant")
    p.add_argument("--spectral-bound", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--epsilon1", type=float)
    p.add_argument("--epsilon2", type=float)
    p.add_argument("--delta", type=float, default=0.05)
    _common(p)
    p.set_defaults(func=cmd_test_empty)

    p = sub.add_parser("learn", help="learn a sparse Hamiltonian from its dynamics")
    p.add_argument("--hamiltonian", metavar="PATH")
    p.add_argument("--M", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--ledger", metavar="PATH", help="per-bucket ledger CSV")
    _common(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("test-sparse", help="test whether a Hamiltonian is M-sparse")
    p.add_argument("--hamiltonian", metavar="PATH")
    p.add_argument("--M", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--spectral-bound", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.1)
    _common(p)
    p.set_defaults(func=cmd_test_sparse)

    p = sub.add_parser("verify-bounds", help="check the analytic bounds on random instances")
    p.add_argument("--trials", type=int)
    _common(p)
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser("scaling", help="sweep learner evolution time over epsilon or M")
    p.add_argument("--sweep", choices=("epsilon", "sparsity"), default="epsilon")
    p.add_argument("--grid", help="comma-separated grid values")
    p.add_argument("--n", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--trials", type=int, help="seeds per grid point")
    _common(p)
    p.set_defaults(func=cmd_scaling)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapabilityError as exc:
        print(f"hamlearn: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (UsageError, DomainError) as exc:
        print(f"hamlearn: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
