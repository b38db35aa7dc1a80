"""``tunnelnav`` command line: tunnel, dataset, training, evaluation and flight pipelines."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .cnn.model import load_model, save_model
from .cnn.train import TrainConfig, predict, train
from .config import ConfigError, RunConfig, load_config, parse_config_text
from .controller import SetpointConfig
from .eval import evaluate, model_classifier, split_dataset
from .imaging import PGMError, preprocess, read_pgm
from .sim.camera import CameraIntrinsics, IlluminationModel
from .sim.dataset import RigConfig, generate_dataset, read_dataset, write_dataset
from .sim.flight import ConstantClassifier, FlightConfig, HeadingOracle, run_closed_loop
from .sim.tunnel import TunnelParams, generate_tunnel

CONFIG_ECHO = "config.txt"
TUNNEL_FILE = "tunnel.txt"
MODEL_FILE = "model.tpcnn"


class CliError(Exception):
    pass


def _tunnel_params(cfg: RunConfig):
    return TunnelParams(width=cfg.width, height=cfg.height, length=cfg.length, arc_radius=cfg.arc_radius,
                        arc_angle_deg=cfg.arc_angle_deg, roughness=cfg.roughness, seed=cfg.seed)


def read_tunnel_file(path):
    p = Path(path)
    if not p.is_file():
        raise CliError(f"tunnel file {p} does not exist")
    raw = parse_config_text(p.read_text())
    known = {f.name: f.type for f in fields(TunnelParams)}
    unknown = set(raw) - set(known)
    if unknown:
        raise CliError(f"unknown keys in tunnel file {p}: {sorted(unknown)}")
    values = {k: (int(v) if known[k] in ("int", int) else float(v)) for k, v in raw.items()}
    seed = values.pop("seed", 0)
    return generate_tunnel(seed, TunnelParams(**values))


def _illumination(cfg: RunConfig):
    return IlluminationModel(cfg.light_intensity, cfg.ambient, cfg.falloff, cfg.noise_sigma)


def _intrinsics(cfg: RunConfig):
    return CameraIntrinsics(hfov=math.radians(cfg.hfov_deg))


def _load_model(path):
    if not path:
        raise CliError("no model given (use --model or set model in the config)")
    p = Path(path)
    if not p.is_file():
        raise CliError(f"model file {p} does not exist")
    return load_model(p)


def _out_dir(args, cfg) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / CONFIG_ECHO).write_text(cfg.to_text())
    return out


def cmd_gen_tunnel(args, cfg):
    tunnel = generate_tunnel(cfg.seed, _tunnel_params(cfg))
    out = _out_dir(args, cfg)
    text = "".join(f"{k} = {v}\n" for k, v in asdict(tunnel.params).items())
    (out / TUNNEL_FILE).write_text(text)
    print(f"wrote {out / TUNNEL_FILE}")


def cmd_gen_dataset(args, cfg):
    if not cfg.tunnel:
        raise CliError("gen-dataset needs a tunnel file (--tunnel)")
    tunnel = read_tunnel_file(cfg.tunnel)
    rig = RigConfig(offset=math.radians(cfg.camera_offset_deg), altitude=cfg.z_d, span=cfg.span,
                    lateral_jitter=cfg.lateral_jitter, vertical_jitter=cfg.vertical_jitter,
                    yaw_jitter=math.radians(cfg.yaw_jitter_deg), illumination_levels=cfg.illumination_levels,
                    intrinsics=_intrinsics(cfg), illumination=_illumination(cfg))
    samples = generate_dataset(tunnel, cfg.n_per_class, rig, seed=cfg.seed)
    out = _out_dir(args, cfg)
    write_dataset(samples, out)
    print(f"wrote {len(samples)} images to {out}")


def _dataset(cfg):
    if not cfg.dataset:
        raise CliError("no dataset directory given (use --dataset)")
    if not Path(cfg.dataset).is_dir():
        raise CliError(f"dataset directory {cfg.dataset} does not exist")
    return read_dataset(cfg.dataset)


def cmd_train(args, cfg):
    samples = _dataset(cfg)
    train_set, hold_set = split_dataset(samples, cfg.train_ratio, seed=cfg.seed)
    tc = TrainConfig(cfg.epochs, cfg.steps_per_epoch, cfg.batch_size, cfg.learning_rate, cfg.seed)
    print(f"training: epochs={tc.epochs} steps_per_epoch={tc.steps_per_epoch} batch_size={tc.batch_size} "
          f"learning_rate={tc.learning_rate} seed={tc.seed} train={len(train_set)} holdout={len(hold_set)}")
    holdout = None
    if hold_set:
        holdout = (np.stack([s.image.data for s in hold_set]), [s.label for s in hold_set])
    model, history = train(np.stack([s.image.data for s in train_set]), [s.label for s in train_set], tc,
                           holdout=holdout)
    out = _out_dir(args, cfg)
    save_model(model, out / MODEL_FILE)
    history.to_csv(out / "history.csv")
    last = history.epochs[-1]
    print(f"final mean loss {last.mean_loss:.4f}, holdout accuracy {last.holdout_accuracy}")


def _classifier(args, cfg):
    if args.oracle:
        return ConstantClassifier(args.oracle)
    return _load_model(cfg.model)


def cmd_eval(args, cfg):
    clf = _classifier(args, cfg)
    samples = _dataset(cfg)
    report = evaluate(model_classifier(clf), samples, source=str(cfg.dataset))
    out = _out_dir(args, cfg)
    (out / "report.txt").write_text(report.to_text())
    (out / "report.csv").write_text(report.to_csv())
    print(report.to_text(), end="")


def cmd_fly(args, cfg):
    if cfg.tunnel:
        tunnel = read_tunnel_file(cfg.tunnel)
    else:
        tunnel = generate_tunnel(cfg.seed, _tunnel_params(cfg))
    if args.oracle == "pursuit":
        clf = HeadingOracle(tunnel)
    else:
        clf = _classifier(args, cfg)
    flight = FlightConfig(dt=cfg.dt, control_rate=cfg.control_rate, max_time=cfg.max_time or None,
                          tau_v=cfg.tau_v, tau_z=cfg.tau_z, radius=cfg.radius,
                          smoothing_window=cfg.smoothing_window, use_lidar=cfg.use_lidar,
                          intrinsics=_intrinsics(cfg), illumination=_illumination(cfg))
    flight.validate()
    velocities = cfg.velocities if args.velocity_sweep else (cfg.v_dx,)
    out = _out_dir(args, cfg)
    summary = io.StringIO()
    w = csv.writer(summary, lineterminator="\n")
    w.writerow(["v_dx", "seed", "outcome", "duration", "min_clearance", "log"])
    for v in velocities:
        sp = SetpointConfig(z_d=cfg.z_d, v_dx=v, v_dy=cfg.v_dy, yaw_rate_magnitude=cfg.yaw_rate)
        for k in range(cfg.runs):
            seed = cfg.seed + k
            log = run_closed_loop(clf, tunnel, sp, flight, seed=seed)
            name = f"flight_v{v:g}_seed{seed}.csv"
            log.save(out / name)
            w.writerow([f"{v:g}", seed, log.outcome, f"{log.rows[-1][0]:.2f}", f"{log.min_clearance:.4f}", name])
            print(f"v_dx={v:g} seed={seed}: {log.outcome} after {log.rows[-1][0]:.1f} s, "
                  f"min clearance {log.min_clearance:.3f} m")
    (out / "summary.csv").write_text(summary.getvalue())


def cmd_classify(args, cfg):
    model = _load_model(cfg.model)
    lines = []
    for path in args.images:
        p = Path(path)
        if not p.is_file():
            raise CliError(f"image {p} does not exist")
        img = preprocess(read_pgm(p))
        label, probs = predict(model, img)
        lines.append(f"{p}\t{label.name.lower()}\t" + "\t".join(f"{q:.6f}" for q in probs))
    text = "\n".join(lines) + "\n"
    if args.out:
        out = _out_dir(args, cfg)
        (out / "classify.tsv").write_text(text)
    print(text, end="")


COMMANDS = {
    "gen-tunnel": cmd_gen_tunnel,
    "gen-dataset": cmd_gen_dataset,
    "train": cmd_train,
    "eval": cmd_eval,
    "fly": cmd_fly,
    "classify": cmd_classify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tunnelnav", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--seed", type=int, help="random seed of this step")
        p.add_argument("--out", default=None if name == "classify" else "runs/" + name,
                       help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one configuration key")
        p.add_argument("-v", "--verbose", action="store_true")
        if name in ("gen-dataset", "fly"):
            p.add_argument("--tunnel", help="tunnel description file")
        if name in ("train", "eval"):
            p.add_argument("--dataset", help="dataset directory")
        if name in ("eval", "fly", "classify"):
            p.add_argument("--model", help="model file")
        if name == "eval":
            p.add_argument("--oracle", choices=["left", "center", "right"],
                           help="use a constant-label classifier instead of a model")
        if name == "fly":
            p.add_argument("--oracle", choices=["left", "center", "right", "pursuit"],
                           help="constant-label or ground-truth classifier instead of a model")
            p.add_argument("--velocity-sweep", action="store_true", help="fly every speed in 'velocities'")
            p.add_argument("--runs", type=int, help="seeded runs per speed")
        if name == "classify":
            p.add_argument("images", nargs="+", help="PGM images")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if not hasattr(args, "oracle"):
        args.oracle = None
    try:
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            overrides[key.strip()] = value
        for key in ("seed", "tunnel", "dataset", "model", "runs"):
            value = getattr(args, key, None)
            if value is not None:
                overrides[key] = str(value)
        cfg = load_config(args.config, overrides)
        COMMANDS[args.command](args, cfg)
    except (CliError, ConfigError, PGMError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
