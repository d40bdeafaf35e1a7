"""Command line interface: denoise, bench, measure, mad, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import denoise as dn
from .cobb import EndplateNotFoundError, PipelineConfig, measure_cobb
from .imagecore import Rect, load_image, save_image
from .kernels import active_backend
from .reliability import (
    BenchmarkSpec,
    ObservationSet,
    inter_observer_table,
    intra_observer_table,
    psnr_benchmark,
    summarize,
)


def _parse_rect_arg(text: str) -> Rect:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected x,y,w,h got {text!r}")
    x, y, w, h = (int(p) for p in parts)
    return Rect(x=x, y=y, w=w, h=h)


def _nl_config(args) -> dn.NlConfig:
    h = dn.h_for_sigma(args.sigma_h) if args.h is None else args.h
    return dn.NlConfig(
        patch_radius=args.patch_radius,
        search_radius=args.search_radius,
        h=h,
        trim_fraction=args.trim,
    )


def _add_nl_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma-h", type=float, default=10.0, dest="sigma_h",
                   help="noise level in 8-bit units; sets h = 10*sigma/255")
    p.add_argument("--h", type=float, default=None,
                   help="weight decay parameter (overrides --sigma-h)")
    p.add_argument("--patch-radius", type=int, default=1)
    p.add_argument("--search-radius", type=int, default=10)
    p.add_argument("--trim", type=float, default=0.30,
                   help="total trimmed fraction for the trimmed-mean filter")


def cmd_denoise(args) -> int:
    img = load_image(args.input)
    out = dn.FILTERS[args.filter](img, _nl_config(args))
    save_image(out, args.output)
    return 0


def cmd_bench(args) -> int:
    raw = json.loads(Path(args.spec).read_text())
    nl_kwargs = raw.get("nl", {})
    spec = BenchmarkSpec(
        clean_images=tuple(raw["clean_images"]),
        sigmas=tuple(raw.get("sigmas", (10.0, 20.0, 30.0, 40.0, 50.0))),
        filters=tuple(raw.get("filters", ("nlm", "nlem", "nletm"))),
        nl=dn.NlConfig(**nl_kwargs),
        seeds=tuple(tuple(row) for row in raw["seeds"]) if "seeds" in raw else None,
    )
    result = psnr_benchmark(spec)
    Path(args.out).write_text(result.to_csv())
    for failure in result.failures:
        print(f"failed: {failure}", file=sys.stderr)
    print(result.to_csv(), end="")
    return 0 if not result.failures else 1


def cmd_measure(args) -> int:
    img = load_image(args.image)
    cfg = PipelineConfig(nl=_nl_config(args), denoiser=args.denoiser)
    try:
        m = measure_cobb(img, args.roi_sup, args.roi_inf, cfg)
    except EndplateNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.dump_edges or args.dump_hough:
        _dump_debug(img, m, cfg, args)
    print(json.dumps(m.to_json_dict(), indent=1))
    return 0


def _dump_debug(img, m, cfg: PipelineConfig, args) -> None:
    from .edges import canny_otsu
    from .enhance import histogram_equalize
    from .imagecore import ROI_MIN_SIZE, crop_roi
    from .lines import hough_accumulate

    for label, roi in (("superior", m.roi_superior), ("inferior", m.roi_inferior)):
        region = crop_roi(img, roi, min_size=ROI_MIN_SIZE)
        cleaned = dn.FILTERS[cfg.denoiser](region, cfg.nl)
        edge_map = canny_otsu(histogram_equalize(cleaned), cfg.canny)
        if args.dump_edges:
            out = Path(args.dump_edges)
            out.mkdir(parents=True, exist_ok=True)
            save_image(edge_map.to_image(), out / f"edges_{label}.pgm")
        if args.dump_hough:
            out = Path(args.dump_hough)
            out.mkdir(parents=True, exist_ok=True)
            acc = hough_accumulate(edge_map, cfg.hough)
            save_image(acc.to_image(), out / f"hough_{label}.pgm")


def cmd_mad(args) -> int:
    obs = ObservationSet.from_csv(Path(args.observations).read_text())
    intra = intra_observer_table(obs)
    inter = inter_observer_table(obs)
    lines = ["table,group,observer,method,mad_deg"]
    for (group, observer, method), value in sorted(intra.cells.items()):
        lines.append(f"intra,{group},{observer},{method},{value:.2f}")
    for (group, method), value in sorted(inter.cells.items()):
        lines.append(f"inter,{group},,{method},{value:.2f}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    for table_name, table in (("intra", intra), ("inter", inter)):
        for warning in table.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        if table.cells:
            summary = summarize(table)
            per_method = ", ".join(
                f"{m}={v:.2f}" for m, v in sorted(summary.means.items())
            )
            print(f"{table_name} overall mean MAD: {per_method}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.listen.rpartition(":")
    app = create_app(args.data_dir, max_image_bytes=args.max_image_bytes,
                     ui_dir=args.ui_dir)
    print(f"kernel backend: {active_backend()}")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cobbkit",
        description="Cobb angle measurement from spine radiographs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="run a non-local filter over an image")
    p.add_argument("--filter", choices=sorted(dn.FILTERS), default="nletm")
    _add_nl_args(p)
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("bench", help="PSNR benchmark across filters and noise levels")
    p.add_argument("--spec", required=True, help="benchmark spec JSON")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("measure", help="measure the Cobb angle from two ROIs")
    p.add_argument("--image", required=True)
    p.add_argument("--roi-sup", required=True, type=_parse_rect_arg, dest="roi_sup",
                   metavar="x,y,w,h")
    p.add_argument("--roi-inf", required=True, type=_parse_rect_arg, dest="roi_inf",
                   metavar="x,y,w,h")
    p.add_argument("--denoiser", choices=sorted(dn.FILTERS), default="nletm")
    _add_nl_args(p)
    p.add_argument("--dump-edges", default=None, metavar="DIR")
    p.add_argument("--dump-hough", default=None, metavar="DIR")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("mad", help="observer variability tables from observations CSV")
    p.add_argument("--observations", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mad)

    p = sub.add_parser("serve", help="run the HTTP measurement service")
    p.add_argument("--listen", default="127.0.0.1:8750")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--max-image-bytes", type=int, default=32 * 1024 * 1024)
    p.add_argument("--ui-dir", default=None, help="static frontend directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
