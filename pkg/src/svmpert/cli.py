"""Command-line front end: train, attack, sweep, verify.

Exit codes: 0 success, 1 usage error, 2 data/format error,
3 verification failure.  Every run writes a key=value manifest next to
its primary output (or to --manifest) recording the resolved flags,
seeds and input digests, so outputs can be reproduced byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time

import numpy as np

import svmpert
from svmpert import dataio, evaluate, gaussmix, oracle, perturb, trainer
from svmpert.models import (
    BinaryLinearModel,
    Dataset,
    MulticlassLinearModel,
    predict_binary_batch,
    predict_multi_batch,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3

DEFAULT_SEED_ENV = "SVMPERT_SEED"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _default_seed() -> int:
    return int(os.environ.get(DEFAULT_SEED_ENV, "0"))


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(path, command: str, flags: dict, inputs: list) -> None:
    lines = [f"command={command}", f"version={svmpert.__version__}"]
    for key in sorted(flags):
        value = flags[key]
        if value is not None:
            lines.append(f"{key}={value}")
    for input_path in inputs:
        lines.append(f"sha256_{os.path.basename(str(input_path))}={_sha256(input_path)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_dataset(args) -> Dataset:
    fmt = args.format
    if fmt == "libsvm":
        with open(args.data) as fh:
            data, _ = dataio.parse_libsvm(fh.read())
        return data
    if fmt == "mnist":
        if not args.labels:
            raise _UsageError("--format mnist requires --labels alongside --data")
        return dataio.load_mnist_idx(args.data, args.labels)
    if fmt == "cifar10":
        return dataio.load_cifar10(args.data.split(","))
    raise _UsageError(f"unknown data format {fmt!r}")


def _data_inputs(args) -> list:
    if args.format == "mnist":
        return [args.data, args.labels]
    if args.format == "cifar10":
        return args.data.split(",")
    return [args.data]


def _load_model(path):
    with open(path) as fh:
        return dataio.parse_liblinear_model(fh.read())


def _parse_grid(spec: str) -> list:
    try:
        start, stop, step = (float(t) for t in spec.split(":"))
    except ValueError:
        raise _UsageError(f"--xi-grid must be start:stop:step, got {spec!r}")
    if step <= 0 or stop < start:
        raise _UsageError("xi grid needs step > 0 and stop >= start")
    grid = list(np.arange(start, stop + step / 2, step))
    if grid and grid[0] <= 0:
        grid = [x for x in grid if x > 0]
    if not grid:
        raise _UsageError("xi grid is empty after dropping non-positive values")
    return grid


def _cmd_train(args) -> int:
    data = _load_dataset(args)
    cfg = trainer.TrainConfig(C=args.C, epochs=args.epochs, seed=args.seed)
    t0 = time.perf_counter()
    if args.task == "binary":
        model = trainer.train_binary_l1(data, cfg)
    else:
        model = trainer.train_crammer_singer(data, cfg)
    elapsed = time.perf_counter() - t0
    with open(args.out, "w") as fh:
        fh.write(dataio.write_liblinear_model(model))
    manifest = args.manifest or args.out + ".manifest"
    _write_manifest(
        manifest,
        "train",
        {
            "task": args.task,
            "data": args.data,
            "format": args.format,
            "C": repr(args.C),
            "epochs": args.epochs,
            "seed": args.seed,
            "out": args.out,
        },
        _data_inputs(args),
    )
    print(f"trained {args.task} model in {elapsed:.2f}s -> {args.out}")
    return EXIT_OK


def _cmd_attack(args) -> int:
    model = _load_model(args.model)
    data = _load_dataset(args)
    binary = isinstance(model, BinaryLinearModel)

    t0 = time.perf_counter()
    if args.kind == "sap":
        eps = args.eps if args.eps is not None else perturb.DEFAULT_EPS
        if binary:
            perts = [perturb.sap_binary(model, x, eps) for x in data.samples]
        else:
            perts = [perturb.sap_multi(model, x, eps) for x in data.samples]
        gen_time = time.perf_counter() - t0
        R = np.array([p.r for p in perts])
        before = (predict_binary_batch if binary else predict_multi_batch)(model, data.samples)
        after = (predict_binary_batch if binary else predict_multi_batch)(model, data.samples + R)
        rate = float(np.mean(after != before))
        report = evaluate.AttackReport(
            fooling_rate=rate,
            bound=1.0,
            per_class_fooled={},
            snr_db=evaluate.snr_db(data.samples, R),
            timing={"generate": gen_time},
            kind="sap",
        )
        rows = R
    else:
        if args.xi is None:
            raise _UsageError(f"--kind {args.kind} requires --xi")
        if args.kind == "cuap":
            if args.source_class is None:
                raise _UsageError("--kind cuap requires --class")
            if binary:
                pert = perturb.cuap_binary(model, args.source_class, args.xi)
            else:
                predicted = predict_multi_batch(model, data.samples)
                omega = data.restrict(predicted == args.source_class)
                pert = perturb.cuap_multi(model, omega, args.xi)
            predicted = (predict_binary_batch if binary else predict_multi_batch)(model, data.samples)
            eval_data = data.restrict(predicted == args.source_class)
        else:  # uap
            theta = evaluate.class_proportions(model, data)
            if binary:
                pert = perturb.uap_binary(model, float(theta.theta[0]), args.xi)
            else:
                pert = perturb.uap_multi(model, theta, args.xi)
            eval_data = data
        gen_time = time.perf_counter() - t0
        report = evaluate.attack_report(model, eval_data, pert, timing={"generate": gen_time})
        rows = pert.r[None, :]

    if args.out_perturbation:
        np.savetxt(args.out_perturbation, rows, delimiter=",")
    report_txt = evaluate.report_text(report)
    if args.out_report:
        with open(args.out_report, "w") as fh:
            fh.write(report_txt)
    sys.stdout.write(report_txt)
    manifest = (args.out_report or args.model) + ".manifest"
    if args.manifest:
        manifest = args.manifest
    _write_manifest(
        manifest,
        "attack",
        {
            "kind": args.kind,
            "model": args.model,
            "data": args.data,
            "format": args.format,
            "xi": None if args.xi is None else repr(args.xi),
            "eps": None if args.eps is None else repr(args.eps),
            "class": args.source_class,
        },
        [args.model] + _data_inputs(args),
    )
    return EXIT_OK


def _cmd_sweep(args) -> int:
    model = _load_model(args.model)
    data = _load_dataset(args)
    grid = _parse_grid(args.xi_grid)
    curve = evaluate.sweep_xi(model, data, args.kind, grid, source_class=args.source_class)
    dataio.export_curve_csv(curve, args.out)
    manifest = args.manifest or args.out + ".manifest"
    _write_manifest(
        manifest,
        "sweep",
        {
            "kind": args.kind,
            "model": args.model,
            "data": args.data,
            "format": args.format,
            "xi_grid": args.xi_grid,
            "class": args.source_class,
            "out": args.out,
        },
        [args.model] + _data_inputs(args),
    )
    print(f"wrote {len(curve.points)}-point curve -> {args.out}")
    return EXIT_OK


def _verify_sap(trials: int, seed: int, tolerance: float) -> tuple[float, bool]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        p = int(rng.integers(2, 21))
        model = BinaryLinearModel(rng.standard_normal(p), float(rng.standard_normal()))
        x = rng.standard_normal(p)
        dev = float(
            np.max(np.abs(perturb.sap_binary(model, x, 0.0).r - oracle.oracle_sap_binary(model, x)))
        )
        worst = max(worst, dev)
    return worst, worst <= tolerance


def _verify_sap_multi(trials: int, seed: int, tolerance: float) -> tuple[float, bool]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        c = int(rng.integers(3, 11))
        p = int(rng.integers(2, 21))
        model = MulticlassLinearModel(rng.standard_normal((p, c)))
        x = rng.standard_normal(p)
        dev = float(
            np.max(np.abs(perturb.sap_multi(model, x, 0.0).r - oracle.oracle_sap_multi(model, x)))
        )
        worst = max(worst, dev)
    return worst, worst <= tolerance


def _verify_gauss(n: int, seed: int, tolerance: float) -> tuple[float, bool]:
    rng = np.random.default_rng(seed)
    p = 4
    mu = rng.standard_normal(p)
    mu = 3.0 * mu / np.linalg.norm(mu)
    params = gaussmix.GaussianMixtureParams(mu, -mu, np.eye(p), np.eye(p), 0.6)
    model = BinaryLinearModel(2.0 * mu, 0.0)
    worst = 0.0
    for xi in np.linspace(0.5, 6.0, 8):
        pert = perturb.uap_binary(model, 0.6, float(xi))
        mc = oracle.mc_fooling_gauss(params, model, pert.r, n, seed)
        theory = gaussmix.theoretical_uap_rate(model, params, float(xi))
        worst = max(worst, abs(mc - theory))
    return worst, worst <= tolerance


def _verify_uap_search(trials: int, seed: int, tolerance: float) -> tuple[float, bool]:
    rng = np.random.default_rng(seed)
    p = 5
    mu = np.zeros(p)
    mu[0] = 2.0
    params = gaussmix.GaussianMixtureParams(mu, -mu, np.eye(p), np.eye(p), 0.6)
    data = gaussmix.sample_mixture(params, 2000, seed)
    model = BinaryLinearModel(mu, 0.0)
    worst = 0.0
    for xi in (1.0, 2.0, 4.0):
        theta1 = float(np.mean(predict_binary_batch(model, data.samples) == 1))
        closed = evaluate.fooling_rate(model, data, perturb.uap_binary(model, theta1, xi).r)
        _, best = oracle.oracle_uap_search(model, data, xi, oracle.OracleConfig(trials, seed))
        worst = max(worst, best - closed)
    return worst, worst <= tolerance


def _cmd_verify(args) -> int:
    suites = {
        "sap": lambda: _verify_sap(args.trials, args.seed, args.tolerance if args.tolerance is not None else 1e-9),
        "sap-multi": lambda: _verify_sap_multi(args.trials, args.seed, args.tolerance if args.tolerance is not None else 1e-9),
        "gauss": lambda: _verify_gauss(args.n, args.seed, args.tolerance if args.tolerance is not None else 0.01),
        "uap-search": lambda: _verify_uap_search(args.trials, args.seed, args.tolerance if args.tolerance is not None else 0.01),
    }
    if args.suite not in suites:
        raise _UsageError(f"unknown suite {args.suite!r}")
    deviation, ok = suites[args.suite]()
    print(f"suite={args.suite} max_deviation={deviation!r} pass={str(ok).lower()}")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> _Parser:
    parser = _Parser(prog="svmpert", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_flags(p):
        p.add_argument("--data", required=True, help="dataset path (cifar10: comma-separated batches)")
        p.add_argument("--format", default="libsvm", choices=["libsvm", "mnist", "cifar10"])
        p.add_argument("--labels", help="labels file (mnist format only)")

    p_train = sub.add_parser("train", help="train a reference model")
    p_train.add_argument("--task", required=True, choices=["binary", "multi"])
    add_data_flags(p_train)
    p_train.add_argument("--C", type=float, default=1.0)
    p_train.add_argument("--epochs", type=int, default=20)
    p_train.add_argument("--seed", type=int, default=_default_seed())
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--manifest")
    p_train.set_defaults(func=_cmd_train)

    p_attack = sub.add_parser("attack", help="generate a perturbation and report")
    p_attack.add_argument("--kind", required=True, choices=["sap", "cuap", "uap"])
    p_attack.add_argument("--model", required=True)
    add_data_flags(p_attack)
    p_attack.add_argument("--xi", type=float)
    p_attack.add_argument("--eps", type=float)
    p_attack.add_argument("--class", dest="source_class", type=int)
    p_attack.add_argument("--out-perturbation")
    p_attack.add_argument("--out-report")
    p_attack.add_argument("--manifest")
    p_attack.set_defaults(func=_cmd_attack)

    p_sweep = sub.add_parser("sweep", help="fooling rate across a budget grid")
    p_sweep.add_argument("--kind", required=True, choices=["binary-uap", "multi-uap", "cuap"])
    p_sweep.add_argument("--model", required=True)
    add_data_flags(p_sweep)
    p_sweep.add_argument("--xi-grid", required=True, help="start:stop:step")
    p_sweep.add_argument("--class", dest="source_class", type=int)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--manifest")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run closed-form-vs-oracle suites")
    p_verify.add_argument("--suite", required=True, choices=["sap", "sap-multi", "gauss", "uap-search"])
    p_verify.add_argument("--trials", type=int, default=1000)
    p_verify.add_argument("--n", type=int, default=100_000)
    p_verify.add_argument("--seed", type=int, default=_default_seed())
    p_verify.add_argument("--tolerance", type=float)
    p_verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (dataio.DataFormatError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
