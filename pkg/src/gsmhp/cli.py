"""Command-line client for the sweep service.

The CLI carries no physics: it resolves configuration (file + flags) into a
sweep request, POSTs it to the service (an in-process ASGI instance by
default, or a remote one via --server), and writes the returned records as
CSV. `gsmhp serve` starts the HTTP service itself.
"""

from __future__ import annotations

import argparse
import asyncio
import sys

import httpx

from .params import (
    FDP,
    GSM_HP,
    ConfigError,
    FeasibilityError,
    load_config,
)
from .sweep import FIGURE_SWEEPS, SWEEP_CUSTOM, SweepRecord, write_csv

_SCHEME_FLAG = {"gsm": [GSM_HP], "fdp": [FDP], "both": [GSM_HP, FDP]}
# which override flag supplies the swept values for each subcommand
_SWEPT_FLAG = {"fig2": "users", "fig3": "nrf", "fig4": "nk", "fig5": "users"}
_PARAM_TO_GEOM = {"users": "n_s", "nrf": "n_rf", "nk": "n_k", "nm": "n_m"}


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int = 2):
        super().__init__(message)
        self.kind = kind
        self.code = code


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsmhp",
        description="Energy-efficiency sweeps for spatial modulation with "
                    "sub-connected hybrid precoding vs full-digital zero-forcing.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--seed", type=int, default=1, help="master seed")
    common.add_argument("--drops", type=int, default=200, help="Monte-Carlo drops per point")
    common.add_argument("--out", help="output CSV path (default <command>.csv)")
    common.add_argument("--scheme", choices=sorted(_SCHEME_FLAG), default="both")
    common.add_argument("--mode", choices=["idealized-zf", "equal-gain"], default=None,
                        help="RF-stage mode (default from config)")
    common.add_argument("--users", type=_int_list, help="user count(s), comma separated")
    common.add_argument("--nrf", type=_int_list, help="RF chain count(s)")
    common.add_argument("--nm", type=_int_list, help="antenna group count(s)")
    common.add_argument("--nk", type=_int_list, help="antennas per group")
    common.add_argument("--server", help="base URL of a running service "
                                         "(default: run in-process)")
    common.add_argument("--verbose", action="store_true",
                        help="print per-record rate/EE summaries")

    sweep_help = {
        "fig2": "energy efficiency vs number of users",
        "fig3": "energy efficiency vs number of RF chains",
        "fig4": "energy efficiency vs antennas per group",
        "fig5": "computation power vs number of users",
    }
    for name, text in sweep_help.items():
        sub.add_parser(name, parents=[common], help=text)

    custom = sub.add_parser("custom", parents=[common],
                            help="sweep a chosen parameter over explicit values")
    custom.add_argument("--param", choices=["users", "nrf", "nk", "nm"], required=True,
                        help="which parameter the values flag sweeps")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _scalar_override(values: list[int] | None, flag: str) -> int | None:
    if values is None:
        return None
    if len(values) != 1:
        raise CliError("usage", f"--{flag} takes a single value here (it is not "
                                f"the swept parameter of this sweep)")
    return values[0]


def build_request(args: argparse.Namespace) -> dict:
    """Resolve config file + flags into a sweep request body."""
    try:
        cfg = load_config(args.config)
    except (ConfigError, FeasibilityError, OSError) as exc:
        raise CliError("config", str(exc))

    swept_flag = args.param if args.command == SWEEP_CUSTOM else _SWEPT_FLAG[args.command]
    swept_values = getattr(args, swept_flag)

    geometry = {
        "n_m": cfg.geometry.n_m, "n_k": cfg.geometry.n_k,
        "n_rf": cfg.geometry.n_rf, "n_s": cfg.geometry.n_s,
    }
    for flag in ("users", "nrf", "nm", "nk"):
        if flag == swept_flag:
            continue
        value = _scalar_override(getattr(args, flag), flag)
        if value is not None:
            geometry[_PARAM_TO_GEOM[flag]] = value

    radio = {k: getattr(cfg.radio, k) for k in (
        "p_max_w", "alpha", "p_rf_chain_w", "p_shifter_w", "p_switch_w",
        "p_fix_w", "noise_psd_dbm_hz", "bandwidth_hz", "coherence_bw_hz",
        "coherence_time_s", "tau", "l_bs_flops_per_w", "p_cod_w_per_bps")}
    channel = {k: getattr(cfg.channel, k) for k in (
        "n_ray", "path_loss_exp", "shadowing_sigma_db", "user_dist_min_m",
        "user_dist_max_m", "carrier_freq_hz", "elevation_range")}

    body = {
        "sweep_kind": SWEEP_CUSTOM if args.command == SWEEP_CUSTOM
                      else FIGURE_SWEEPS[args.command],
        "swept_values": swept_values,
        "geometry": geometry,
        "radio": radio,
        "channel": channel,
        "schemes": _SCHEME_FLAG[args.scheme],
        "n_drops": args.drops,
        "seed": args.seed,
        "mode": args.mode or cfg.mode,
        "gain_model": cfg.gain_model,
        "precoder_solves": cfg.precoder_solves,
    }
    if args.command == SWEEP_CUSTOM:
        body["swept_param"] = args.param
    return body


async def _post_sweep(body: dict, server: str | None) -> dict:
    if server:
        async with httpx.AsyncClient(base_url=server, timeout=3600.0) as client:
            response = await client.post("/sweep", json=body)
    else:
        from .service import create_app
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://gsmhp.local",
                                     timeout=None) as client:
            response = await client.post("/sweep", json=body)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        kind = "config" if response.status_code == 422 else "server"
        raise CliError(kind, f"{detail}", code=2 if kind == "config" else 1)
    return response.json()


def run_sweep_command(args: argparse.Namespace) -> int:
    body = build_request(args)
    payload = asyncio.run(_post_sweep(body, args.server))
    for skip in payload["skipped"]:
        print(f"warning: skipped {skip['swept_value']:g} ({skip['scheme']}): "
              f"{skip['reason']}", file=sys.stderr)
    records = [SweepRecord.from_flat_dict(r) for r in payload["records"]]
    if not records:
        raise CliError("empty", "no feasible sweep points produced records", code=1)
    out = args.out or f"{args.command}.csv"
    write_csv(records, out)
    if args.verbose:
        for r in records:
            print(f"{r.scheme} {r.sweep_kind}={r.swept_value:g}: "
                  f"rate={r.r_total_bps:.6g} bps (stderr {r.rate_stderr_bps:.3g}), "
                  f"P={r.power.p_total_w:.6g} W, EE={r.ee_bit_per_joule:.6g} bit/J")
    print(f"wrote {len(records)} records to {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "serve":
            import uvicorn
            uvicorn.run("gsmhp.service:app", host=args.host, port=args.port)
            return 0
        return run_sweep_command(args)
    except CliError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, FeasibilityError, ValueError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"error: http: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
