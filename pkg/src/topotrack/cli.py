"""``topotrack`` command line: run, gen, sample and validate.

Exit codes: 0 success, 1 input error, 2 parameter error, 3 internal error.
"""

import argparse
import sys
import warnings
from pathlib import Path

from .errors import InputError, ParameterError, TopoTrackError
from .io import StatesDocument, load_sequence, read_states, sequence_manifest, write_frame
from .io import write_scene, write_states
from .mixture import DEFAULT_EPS_REG, loop_mixture, mixture_sample
from .scenegen import KINDS, SceneSpec, gen_scene
from .tracker import SeqPH, TrackerParams
from .validation import SUITES
from .vr_complex import covering_radius, farthest_point_subsample, sampling_radius

EXIT_OK, EXIT_INPUT, EXIT_PARAM, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def measured_alpha(cloud, max_points, seed):
    """Covering radius of frame 0's subsample.

    The subsample's distance to the dropped points is measured directly; the
    sample's own spacing stands in for the gaps of the underlying set.
    """
    sub = farthest_point_subsample(cloud, max_points, seed=seed)
    return max(covering_radius(cloud, sub), sampling_radius(sub))


def resolve_params(args, frames, manifest):
    """Flag, then manifest, then derived default, for each of alpha, beta, epsilon."""
    source = {}

    def pick(name, default):
        flag = getattr(args, name)
        if flag is not None:
            source[name] = "flag"
            return flag
        declared = getattr(manifest, name)
        if declared is not None:
            source[name] = "manifest"
            return declared
        source[name] = "default"
        return default()

    alpha = pick("alpha", lambda: 2.0 * measured_alpha(frames[0], args.max_points, args.seed))
    beta = pick("beta", lambda: alpha)
    epsilon = pick("epsilon", lambda: 0.45 * alpha)
    params = TrackerParams(alpha, beta, epsilon, r_max=args.rmax, max_points=args.max_points,
                           seed=args.seed)
    return params, source


def cmd_run(args):
    manifest = sequence_manifest(args.input)
    frames = load_sequence(args.input)
    params, source = resolve_params(args, frames, manifest)
    tracker = SeqPH(params)
    states, mixtures = [], []
    for cloud in frames:
        state = tracker.step(cloud)
        states.append(state)
        mixtures.append({d.id: loop_mixture(d, args.eps_reg) for d in state.loops})
    parameters = {
        "alpha": params.alpha,
        "beta": params.beta,
        "epsilon": params.epsilon,
        "sources": source,
        "r_max": params.r_max,
        "max_points": params.max_points,
        "seed": params.seed,
        "eps_reg": args.eps_reg,
        "units": manifest.units,
        "frames": len(frames),
    }
    write_states(StatesDocument(parameters, states, mixtures), args.out)
    loops = sorted({i for s in states for i in s.ids})
    print(f"{len(frames)} frames, loop ids {loops}, alpha={params.alpha:.6g} "
          f"beta={params.beta:.6g} epsilon={params.epsilon:.6g} -> {args.out}")
    return EXIT_OK


def cmd_gen(args):
    spec = SceneSpec(args.kind, points_per_frame=args.points, frames=args.frames,
                     radius=args.radius, tube_width=args.tube_width, noise_sigma=args.noise,
                     step_motion=args.step_motion, separation=args.separation, seed=args.seed,
                     alpha=args.alpha, beta=args.beta, epsilon=args.epsilon)
    frames, truth = gen_scene(spec)
    manifest = write_scene(frames, truth, args.out)
    print(f"{len(frames)} frames of {spec.points_per_frame} points, measured alpha "
          f"{truth.alpha:.6g} -> {manifest}")
    return EXIT_OK


def cmd_sample(args):
    doc = read_states(args.states)
    if not 0 <= args.frame < len(doc.states):
        raise ParameterError(f"frame {args.frame} out of range 0..{len(doc.states) - 1}")
    mixtures = doc.mixtures[args.frame]
    if args.loop_id not in mixtures:
        raise ParameterError(f"frame {args.frame} has no loop {args.loop_id}; "
                             f"loops are {sorted(mixtures)}")
    pts = mixture_sample(mixtures[args.loop_id], args.n, seed=args.seed)
    try:
        write_frame(pts, args.out)
    except OSError as exc:
        raise InputError(f"{args.out}: cannot write samples ({exc.strerror})") from exc
    print(f"{args.n} samples of loop {args.loop_id} in frame {args.frame} -> {args.out}")
    return EXIT_OK


def cmd_validate(args):
    names = [args.suite] if args.suite else list(SUITES)
    ok = True
    for name in names:
        result = SUITES[name](seed=args.seed)
        print(result.report(), flush=True)
        ok &= result.passed
    return EXIT_OK if ok else EXIT_INTERNAL


def build_parser():
    p = _Parser(prog="topotrack", description="Track persistent loops through point-cloud sequences.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="track loops through a frame sequence")
    run.add_argument("--input", required=True, type=Path, help="frame directory or manifest")
    run.add_argument("--alpha", type=float)
    run.add_argument("--beta", type=float)
    run.add_argument("--epsilon", type=float)
    run.add_argument("--rmax", type=float, help="truncation radius (default: enclosing radius)")
    run.add_argument("--max-points", type=int, default=768)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--eps-reg", type=float, default=DEFAULT_EPS_REG)
    run.add_argument("--out", required=True, type=Path)
    run.set_defaults(func=cmd_run)

    gen = sub.add_parser("gen", help="write a synthetic annulus scene")
    gen.add_argument("--kind", choices=KINDS, default="annulus")
    gen.add_argument("--points", type=int, default=512)
    gen.add_argument("--frames", type=int, default=10)
    gen.add_argument("--radius", type=float, default=1.0)
    gen.add_argument("--tube-width", type=float, default=0.1)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--step-motion", type=float, default=0.0)
    gen.add_argument("--separation", type=float)
    gen.add_argument("--alpha", type=float)
    gen.add_argument("--beta", type=float)
    gen.add_argument("--epsilon", type=float)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, type=Path)
    gen.set_defaults(func=cmd_gen)

    smp = sub.add_parser("sample", help="draw points from a loop's mixture")
    smp.add_argument("--states", required=True, type=Path)
    smp.add_argument("--frame", required=True, type=int)
    smp.add_argument("--loop-id", required=True, type=int)
    smp.add_argument("--n", type=int, default=1000)
    smp.add_argument("--seed", type=int, default=0)
    smp.add_argument("--out", required=True, type=Path)
    smp.set_defaults(func=cmd_sample)

    val = sub.add_parser("validate", help="run self-checks")
    val.add_argument("--suite", choices=sorted(SUITES))
    val.add_argument("--seed", type=int, default=0)
    val.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.func(args)
    except TopoTrackError as exc:
        print(f"topotrack: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # anything else is a bug
        print(f"topotrack: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
