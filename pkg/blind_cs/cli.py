"""
Command-line interface

    python blind_cs/cli.py phantom     --kind shepp-logan --shape 64x64 --out x.bcs
    python blind_cs/cli.py mask        --shape 64x64 --scheme random2d --accel 4 --out m.bcs
    python blind_cs/cli.py simulate    --image x.bcs --mask m.bcs --out k.bcs
    python blind_cs/cli.py zerofill    --kspace k.bcs --mask m.bcs --out zf.bcs
    python blind_cs/cli.py reconstruct --kspace k.bcs --mask m.bcs --out rec.bcs --trace trace.csv
    python blind_cs/cli.py metrics     --recon rec.bcs --ref x.bcs

Exit codes: 0 success, 2 usage, 3 data / configuration error, 4 numerical failure.
"""

import argparse
import json
import logging
import sys

from config import RunConfig
from container import read_container, write_container
from errors import EXIT_OK, ArgumentError, BlindCSError, ConfigurationError, exit_code_for
from metrics import report
from phantom import KINDS as PHANTOM_KINDS, make_phantom
from sensing import FourierSampling, gen_mask_cartesian, gen_mask_random2d, simulate_kspace, zero_fill_recon
from solver import solve

logger = logging.getLogger(__name__)


def parse_shape(text: str) -> tuple:
    try:
        h, w = (int(v) for v in text.lower().split('x'))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected HxW, got {text!r}")
    if h < 1 or w < 1:
        raise argparse.ArgumentTypeError(f"dimensions must be positive, got {text!r}")
    return h, w


# ==============================================================================
# Commands
# ==============================================================================

def cmd_phantom(args) -> None:
    image = make_phantom(args.kind, args.shape, args.seed)
    write_container(args.out, image, 'image')
    print(f"✓ Wrote {args.kind} phantom {args.shape[0]}x{args.shape[1]} to {args.out}")


def cmd_mask(args) -> None:
    if args.scheme == 'random2d':
        center = 8 if args.center is None else args.center
        mask = gen_mask_random2d(args.shape, args.accel, args.density_power, center, args.seed)
    else:
        if args.center is not None and not float(args.center).is_integer():
            raise ArgumentError(f"Cartesian --center counts rows and must be an integer, got {args.center:g}")
        center = 8 if args.center is None else int(args.center)
        mask = gen_mask_cartesian(args.shape, args.accel, args.density_power, center, args.seed)
    write_container(args.out, mask, 'mask')
    m = int(mask.sum())
    print(f"✓ Wrote {args.scheme} mask to {args.out}")
    print(f"  m = {m}, acceleration = {mask.size / m:.4f}")


def cmd_simulate(args) -> None:
    image = read_container(args.image, 'image')
    mask = read_container(args.mask, 'mask')
    kspace = simulate_kspace(image, mask, args.noise_std, args.seed)
    write_container(args.out, kspace, 'kspace')
    print(f"✓ Simulated {int(mask.sum())} k-space samples (noise std {args.noise_std:g}) to {args.out}")


def cmd_zerofill(args) -> None:
    kspace = read_container(args.kspace, 'kspace')
    mask = read_container(args.mask, 'mask')
    write_container(args.out, zero_fill_recon(kspace, mask), 'image')
    print(f"✓ Wrote zero-filled reconstruction to {args.out}")


def resolve_config(args) -> RunConfig:
    """Defaults, then --config, then explicit flags."""
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    overrides = {
        'algo': args.algo, 'nu': args.nu, 'lambda0': args.lambda0, 'sparsity_frac': args.sparsity_frac,
        'eta': args.eta, 'energy_cap': args.energy_cap, 'inner': args.inner, 'iters': args.iters,
        'schedule': None if args.schedule is None else args.schedule == 'on',
        'early_stop': args.early_stop, 'subtract_offset': args.subtract_offset, 'l_factor': args.l_factor,
        'patch': args.patch, 'stride': args.stride, 'wrap': args.wrap,
        'kspace': args.kspace, 'mask': args.mask, 'ref': args.ref, 'out': args.out,
        'trace': args.trace, 'save_transform': args.save_transform,
    }
    return cfg.merged(overrides)


def cmd_reconstruct(args) -> None:
    run = resolve_config(args)
    logger.debug(f"resolved configuration: {run}")
    if args.dump_config:
        run.to_json(args.dump_config)
        print(f"✓ Wrote resolved configuration to {args.dump_config}")
    for key in ('kspace', 'mask', 'out'):
        if getattr(run, key) is None:
            raise argparse.ArgumentTypeError(f"--{key} is required (flag or config file)")

    mask = read_container(run.mask, 'mask')
    kspace = read_container(run.kspace, 'kspace')
    if kspace.shape != mask.shape:
        raise ConfigurationError(f"k-space {kspace.shape} and mask {mask.shape} differ in shape")
    reference = read_container(run.ref, 'image') if run.ref else None

    A = FourierSampling(mask)
    y = A.from_kspace(kspace)
    print(f"[+] Reconstructing {mask.shape[0]}x{mask.shape[1]} image with {run.algo.upper()}, "
          f"{run.iters} iterations")
    result = solve(y, A, run.solver_params(), run.patch_config(), reference=reference)

    write_container(run.out, result.x, 'image')
    print(f"✓ Wrote reconstruction to {run.out}")
    if run.save_transform:
        write_container(run.save_transform, result.W, 'matrix')
        print(f"✓ Wrote transform to {run.save_transform}")
    if run.trace:
        result.trace.to_csv(run.trace)
        print(f"✓ Wrote trace ({len(result.trace.rows)} rows) to {run.trace}")

    last = result.trace.rows[-1]
    print(f"  objective = {last.breakdown.total:.6e}, kappa = {last.kappa:.4f}")
    if reference is not None:
        print(f"  PSNR = {last.psnr:.2f} dB, HFEN = {last.hfen:.4f}")


def cmd_metrics(args) -> None:
    recon = read_container(args.recon, 'image')
    ref = read_container(args.ref, 'image')
    r = report(recon, ref)
    text = json.dumps({'psnr_db': r.psnr_db, 'hfen': r.hfen}, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, 'w') as f:
            f.write(text + '\n')


# ==============================================================================
# Parser
# ==============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='blind_cs', description="Transform-blind compressed sensing MRI")
    parser.add_argument('--verbose', '-v', action='store_true', help="debug logging")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('phantom', help="write a test image")
    p.add_argument('--kind', choices=PHANTOM_KINDS, default='shepp-logan')
    p.add_argument('--shape', type=parse_shape, default=(64, 64))
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser('mask', help="write a k-space sampling mask")
    p.add_argument('--shape', type=parse_shape, required=True)
    p.add_argument('--scheme', choices=('random2d', 'cartesian'), default='random2d')
    p.add_argument('--accel', type=float, required=True)
    p.add_argument('--density-power', type=float, default=2.0)
    p.add_argument('--center', type=float, default=None,
                   help="center disk radius (random2d) or number of center rows (cartesian)")
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser('simulate', help="simulate undersampled k-space")
    p.add_argument('--image', required=True)
    p.add_argument('--mask', required=True)
    p.add_argument('--noise-std', type=float, default=0.0)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('zerofill', help="zero-filling reconstruction")
    p.add_argument('--kspace', required=True)
    p.add_argument('--mask', required=True)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_zerofill)

    # defaults live in RunConfig so that --config values are not shadowed
    p = sub.add_parser('reconstruct', help="run the blind reconstruction")
    p.add_argument('--config')
    p.add_argument('--dump-config')
    p.add_argument('--kspace')
    p.add_argument('--mask')
    p.add_argument('--ref')
    p.add_argument('--out')
    p.add_argument('--trace')
    p.add_argument('--save-transform')
    p.add_argument('--algo', choices=('a1', 'a2', 'a3'))
    p.add_argument('--patch', type=int)
    p.add_argument('--stride', type=int)
    p.add_argument('--wrap', action=argparse.BooleanOptionalAction, default=None)
    p.add_argument('--nu', type=float, help="fidelity weight in unnormalized DFT units (default 3.81)")
    p.add_argument('--lambda0', type=float)
    p.add_argument('--sparsity-frac', type=float)
    p.add_argument('--eta', type=float)
    p.add_argument('--energy-cap', type=float)
    p.add_argument('--inner', type=int)
    p.add_argument('--iters', type=int)
    p.add_argument('--schedule', choices=('on', 'off'))
    p.add_argument('--early-stop', type=float)
    p.add_argument('--subtract-offset', action='store_true', default=None)
    p.add_argument('--l-factor', choices=('cholesky', 'evd'))
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser('metrics', help="PSNR and HFEN of a reconstruction")
    p.add_argument('--recon', required=True)
    p.add_argument('--ref', required=True)
    p.add_argument('--out')
    p.set_defaults(func=cmd_metrics)

    return parser


def main(argv: list = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        args.func(args)
    except argparse.ArgumentTypeError as e:
        parser.error(str(e))
    except (BlindCSError, OSError) as e:
        print(f"[!] {type(e).__name__}: {e}", file=sys.stderr)
        return exit_code_for(e)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
