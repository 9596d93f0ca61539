"""``metrepair`` command line.

Exit codes: 0 success, 1 violations found under ``--strict``, 2 bad
input or usage.  Every run writes a manifest (inputs with digests,
parameters, outputs, timing) next to its outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from . import io as mio
from .admissibility import (
    ball_mass_profile,
    epsilon_entropy_exact,
    epsilon_entropy_greedy,
    lemma1_crosscheck,
)
from .core import (
    Kernel,
    MetricInputError,
    PointSpace,
    SizeLimitError,
    triangle_defect_scan,
    ultrametric_defect_scan,
    validate,
)
from .correction import (
    CorrectionParams,
    PatchSpec,
    limsup_correct,
    patch_from_basepoint,
    separable_support,
)
from .equivalence import coincidence_support, transfer_inequality_check
from .generators import Corruption, InstanceSpec, generate
from .sampling import fingerprint, fingerprint_compare
from .ultrametric import PowerLadder, monotonicity_report, power_mean_correct

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _pairs(text: str) -> list[tuple[int, int]]:
    out = []
    for tok in text.split(","):
        a, b = tok.split("-")
        out.append((int(a), int(b)))
    return out


class Run:
    """Collects inputs and outputs for the manifest."""

    def __init__(self, args):
        self.args = args
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.start = time.perf_counter()

    def read_matrix(self, path) -> Kernel:
        self._digest(path)
        return Kernel(mio.read_matrix(path))

    def space(self, kernel: Kernel, masses_path=None, layout: str | None = None) -> PointSpace:
        if masses_path:
            self._digest(masses_path)
        masses = mio.read_masses(masses_path, kernel.n)
        if layout is None:
            layout = "unordered" if masses_path else "circle"
        return PointSpace(masses, layout)

    def _digest(self, path):
        self.inputs[str(path)] = hashlib.sha256(Path(path).read_bytes()).hexdigest()

    def write(self, path, writer, obj):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        writer(path, obj)
        self.outputs.append(str(path))

    def report(self, obj) -> None:
        if self.args.out:
            self.write(self.args.out, mio.write_json, obj)
        else:
            print(mio.dumps(obj))

    def manifest_path(self) -> Path:
        if self.args.manifest:
            return Path(self.args.manifest)
        if self.args.out:
            return Path(str(self.args.out) + ".manifest.json")
        out_dir = getattr(self.args, "out_dir", None)
        if out_dir:
            return Path(out_dir) / "run_manifest.json"
        return Path(f"{self.args.command}.manifest.json")

    def finish(self, error: str | None = None) -> None:
        params = {k: v for k, v in vars(self.args).items()
                  if k not in ("func", "manifest") and v is not None}
        manifest = {
            "subcommand": self.args.command,
            "tool_version": __version__,
            "inputs": self.inputs,
            "parameters": params,
            "outputs": self.outputs,
            "seconds": time.perf_counter() - self.start,
        }
        if error is not None:
            manifest["error"] = error
        path = self.manifest_path()
        path.parent.mkdir(parents=True, exist_ok=True)
        mio.write_json(path, manifest)


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(run: Run) -> int:
    a = run.args
    kernel = run.read_matrix(a.matrix)
    space = run.space(kernel, a.masses, a.layout)
    verdict = validate(kernel, space)
    run.report(verdict)
    return EXIT_VIOLATION if (a.strict and not verdict.ok) else EXIT_OK


def cmd_scan(run: Run) -> int:
    a = run.args
    kernel = run.read_matrix(a.matrix)
    space = run.space(kernel, a.masses, "unordered")
    scan = ultrametric_defect_scan if a.ultrametric else triangle_defect_scan
    kw = dict(tolerance=a.tolerance, workers=a.threads)
    if a.sampled:
        kw.update(mode="sampled", count=a.sampled, seed=a.seed)
    report = scan(kernel, space, **kw)
    run.report(report)
    return EXIT_VIOLATION if (a.strict and report.violating_mass > 0) else EXIT_OK


def _correction_params(a) -> CorrectionParams:
    cfg = {}
    if a.config:
        cfg = json.loads(Path(a.config).read_text())
        cfg = cfg.get("correction", cfg)
    if a.ladder:
        cfg["ladder"] = _ints(a.ladder)
    elif a.window:
        cfg["ladder"] = [a.window]
    if a.tail_mode:
        cfg["tail_mode"] = a.tail_mode
    if a.tail_length:
        cfg["tail_length"] = a.tail_length
    if a.tolerance is not None:
        cfg["tolerance"] = a.tolerance
    if a.base_point is not None:
        cfg["base_point"] = a.base_point
    return CorrectionParams.from_dict(cfg)


def cmd_correct(run: Run) -> int:
    a = run.args
    kernel = run.read_matrix(a.matrix)
    space = PointSpace.circle(kernel.n)
    params = _correction_params(a)
    patched = None
    if a.s1_file:
        s1 = mio.read_index_list(a.s1_file)
        run._digest(a.s1_file)
        x0 = params.base_point if params.base_point is not None else s1[0]
        patched = PatchSpec(s1, x0)
    # averaging refuses +inf, so infinite inputs are patched before it
    patch_first = patched is not None and not kernel.is_finite
    if patch_first:
        kernel = patch_from_basepoint(kernel, patched, params.tolerance)
    out = limsup_correct(kernel, space, params)
    if patched is not None and not patch_first:
        out = patch_from_basepoint(out, patched, params.tolerance)
    run.write(a.output, mio.write_matrix, out.values)
    sidecar = {
        "params": params.to_dict(),
        "patch": None if patched is None else {"s1": list(patched.s1), "x0": patched.x0,
                                               "before_averaging": patch_first},
        "provenance": {"source": str(a.matrix), "sha256": run.inputs[str(a.matrix)],
                       "meta": out.meta, "tool_version": __version__},
    }
    run.write(str(a.output) + ".json", mio.write_json, sidecar)
    report = triangle_defect_scan(out, space, tolerance=params.tolerance, workers=a.threads)
    run.report({"output": str(a.output), "scan": report.to_dict()})
    return EXIT_VIOLATION if (a.strict and report.violating_mass > 0) else EXIT_OK


def cmd_ultra(run: Run) -> int:
    a = run.args
    kernel = run.read_matrix(a.matrix)
    space = PointSpace.circle(kernel.n)
    ladder = PowerLadder.parse(a.exponents, a.window)
    outputs = power_mean_correct(kernel, space, ladder)
    out_dir = Path(a.out_dir)
    for label, k in zip(ladder.labels(), outputs):
        run.write(out_dir / f"power_{label}.txt", mio.write_matrix, k.values)
    mono = monotonicity_report(outputs, ladder)
    last = ultrametric_defect_scan(outputs[-1], space, workers=a.threads)
    mono["final_ultrametric_scan"] = last.to_dict()
    run.write(out_dir / "monotonicity.json", mio.write_json, mono)
    run.report(mono)
    bad = not mono["monotone"] or last.violating_mass > 0
    return EXIT_VIOLATION if (a.strict and bad) else EXIT_OK


def cmd_entropy(run: Run) -> int:
    a = run.args
    kernel = run.read_matrix(a.matrix)
    space = run.space(kernel, a.masses, "unordered")
    radius = a.radius if a.radius is not None else a.epsilon
    if radius is None:
        raise MetricInputError("entropy needs --epsilon or --radius")
    deficit = a.deficit if a.deficit is not None else radius
    if a.exact:
        report = epsilon_entropy_exact(kernel, space, radius, deficit, size_limit=a.limit)
    else:
        report = epsilon_entropy_greedy(kernel, space, radius, deficit)
    run.report(report)
    return EXIT_VIOLATION if (a.strict and not report.reached) else EXIT_OK


def cmd_support(run: Run) -> int:
    a = run.args
    kernel = run.read_matrix(a.matrix)
    space = run.space(kernel, a.masses, "unordered")
    eps = _floats(a.epsilons)
    result = separable_support(kernel, space, eps)
    body = {"support": result.to_dict()}
    if a.profile_csv:
        profile = ball_mass_profile(kernel, space, sorted(eps))
        run.write(a.profile_csv, lambda p, s: Path(p).write_text(s), profile.to_csv())
        body["profile"] = profile.to_dict()
    failed = False
    if a.crosscheck:
        check = lemma1_crosscheck(kernel, space, eps)
        body["crosscheck"] = check.to_dict()
        failed = not check.passed
    run.report(body)
    return EXIT_VIOLATION if (a.strict and failed) else EXIT_OK


def cmd_equiv(run: Run) -> int:
    a = run.args
    k1 = run.read_matrix(a.a)
    k2 = run.read_matrix(a.b)
    space = run.space(k1, a.masses, "unordered")
    method = "exact_cover" if a.exact else "greedy_cover"
    result = coincidence_support(k1, k2, space, a.tolerance, method)
    body = result.to_dict()
    if a.transfer_radius:
        body["transfer"] = transfer_inequality_check(
            k1, k2, space, result.retained, a.transfer_radius, a.trials, a.seed, a.tolerance
        ).to_dict()
    if a.retained_out:
        run.write(a.retained_out, mio.write_index_list, result.retained)
    run.report(body)
    return EXIT_VIOLATION if (a.strict and result.removed) else EXIT_OK


def cmd_generate(run: Run) -> int:
    a = run.args
    corruption = None
    if a.corrupt_rows:
        corruption = Corruption("rows", _ints(a.corrupt_rows), value=a.value)
    elif a.corrupt_cells:
        corruption = Corruption("cells", pairs=_pairs(a.corrupt_cells), value=a.value)
    elif a.noise_fraction:
        corruption = Corruption("scaled_noise", fraction=a.noise_fraction,
                                magnitude=a.noise_magnitude, seed=a.seed)
    spec = InstanceSpec(a.family, a.n, dim=a.dim, block=a.block, constant=a.constant,
                        corruption=corruption, outliers=a.outliers,
                        outlier_distance=a.outlier_distance)
    inst = generate(spec, a.seed)
    out_dir = Path(a.out_dir)
    run.write(out_dir / "matrix.txt", mio.write_matrix, inst.kernel.values)
    run.write(out_dir / "masses.txt", mio.write_masses, inst.space.masses)
    run.write(out_dir / "clean.txt", mio.write_matrix, inst.clean.values)
    run.write(out_dir / "manifest.json", mio.write_json, inst.manifest)
    run.report({"out_dir": str(out_dir), "corrupted_mass": inst.manifest["corrupted_mass"],
                "corrupted_pairs": len(inst.manifest["corrupted_pairs"])})
    return EXIT_OK


def cmd_sample(run: Run) -> int:
    a = run.args
    kernel = run.read_matrix(a.matrix)
    space = run.space(kernel, a.masses, "unordered")
    run.report(fingerprint(kernel, space, a.k, a.trials, a.seed))
    return EXIT_OK


def cmd_compare(run: Run) -> int:
    a = run.args
    ka = run.read_matrix(a.a)
    kb = run.read_matrix(a.b)
    sa = run.space(ka, a.masses_a, "unordered")
    sb = run.space(kb, a.masses_b, "unordered")
    stat = fingerprint_compare(ka, sa, kb, sb, a.k, a.trials, a.seed_a, a.seed_b)
    run.report({"statistic": stat, "k": a.k, "trials": a.trials,
                "seed_a": a.seed_a, "seed_b": a.seed_b})
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--manifest", help="run manifest path")
    common.add_argument("--strict", action="store_true",
                        help="exit 1 when violations are found")
    common.add_argument("--threads", type=int, default=1, help="worker count for scans")

    parser = _Parser(prog="metrepair", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "check structural invariants")
    p.add_argument("--matrix", required=True)
    p.add_argument("--masses")
    p.add_argument("--layout", choices=["circle", "unordered"])

    p = add("scan", cmd_scan, "scan triples for defects")
    p.add_argument("--matrix", required=True)
    p.add_argument("--masses")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--ultrametric", action="store_true")
    p.add_argument("--sampled", type=int, metavar="COUNT")
    p.add_argument("--seed", type=int, default=0)

    p = add("correct", cmd_correct, "window-ladder correction and base-point patch")
    p.add_argument("--matrix", required=True)
    p.add_argument("--output", required=True, help="corrected matrix path")
    p.add_argument("--window", type=int)
    p.add_argument("--ladder")
    p.add_argument("--tail-mode", choices=["finest", "max_over_tail"])
    p.add_argument("--tail-length", type=int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--base-point", type=int)
    p.add_argument("--s1-file", help="index list of S1; other points are collapsed onto "
                   "the base point (before averaging when the input has +inf)")
    p.add_argument("--config", help="JSON file with a correction block")

    p = add("ultra", cmd_ultra, "power-mean ladder for almost-ultrametrics")
    p.add_argument("--matrix", required=True)
    p.add_argument("--exponents", default="1,2,4,8,inf")
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--out-dir", required=True)

    p = add("entropy", cmd_entropy, "epsilon-entropy")
    p.add_argument("--matrix", required=True)
    p.add_argument("--masses")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--deficit", type=float)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--limit", type=int, default=16)

    p = add("support", cmd_support, "separable support, ball profile, cross-check")
    p.add_argument("--matrix", required=True)
    p.add_argument("--masses")
    p.add_argument("--epsilons", required=True, help="comma-separated radii")
    p.add_argument("--profile-csv")
    p.add_argument("--crosscheck", action="store_true")

    p = add("equiv", cmd_equiv, "coincidence set of two kernels")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--masses")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--retained-out")
    p.add_argument("--transfer-radius", type=float)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = add("generate", cmd_generate, "synthetic instances")
    p.add_argument("--family", required=True,
                   choices=["circle", "embedding", "dyadic_ultrametric", "dendrogram", "constant"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--block", type=int, default=1)
    p.add_argument("--constant", type=float, default=1.0)
    p.add_argument("--corrupt-rows")
    p.add_argument("--corrupt-cells", help="pairs like 0-3,2-5")
    p.add_argument("--value", type=float)
    p.add_argument("--noise-fraction", type=float)
    p.add_argument("--noise-magnitude", type=float, default=3.0)
    p.add_argument("--outliers", type=int, default=0)
    p.add_argument("--outlier-distance", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)

    p = add("sample", cmd_sample, "distance-matrix fingerprint")
    p.add_argument("--matrix", required=True)
    p.add_argument("--masses")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)

    p = add("compare", cmd_compare, "compare two fingerprints")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--masses-a")
    p.add_argument("--masses-b")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed-a", type=int, default=0)
    p.add_argument("--seed-b", type=int, default=1)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    ctx = Run(args)
    try:
        code = args.func(ctx)
    except (MetricInputError, SizeLimitError, ValueError, IndexError, OSError) as exc:
        # FormatError is a ValueError; its message carries the line number
        print(f"error: {exc}", file=sys.stderr)
        ctx.finish(error=str(exc))
        return EXIT_INPUT
    ctx.finish()
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
