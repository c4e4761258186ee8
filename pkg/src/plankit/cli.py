"""Command-line front door: serve the HTTP API, replay the scripted
walkthrough, run the detection benchmark, and inspect session files.

Exit codes: 0 success, 1 domain error, 2 corrupt input or bad configuration
(click usage errors also exit 2). Provider credentials are read from the
environment only, never from flags.
"""

from __future__ import annotations

import json
import socket
import sys
from functools import wraps
from pathlib import Path

import click

from . import session as session_io
from .curation_engine import AblationMode, EngineConfig
from .errors import (
    AddrInUse,
    BadConfig,
    CorruptSession,
    PlanningError,
    SchemaMismatch,
)
from .eval_harness import (
    SUITE_PATH,
    OracleProvider,
    load_suite,
    render_report,
    run_eval,
    write_csv,
)
from .llm_provider import LiveProvider, MockProvider, ProviderConfig, ProviderScript
from .prompt_library import VARIANT_ORDER, DetectionVariant
from .walkthrough import DEFAULT_SCRIPT_PATH, run_walkthrough

CONFIG_EXIT_ERRORS = (BadConfig, CorruptSession, SchemaMismatch, session_io.SessionLocked)


def _echo_error(message: str, no_color: bool) -> None:
    click.secho(f"error: {message}", fg=None if no_color else "red", err=True)


def handle_errors(fn):
    """Map domain errors to exit 1 and corrupt input/config to exit 2."""

    @wraps(fn)
    def wrapper(*args, **kwargs):
        no_color = kwargs.get("no_color", False)
        try:
            return fn(*args, **kwargs)
        except CONFIG_EXIT_ERRORS as exc:
            _echo_error(str(exc), no_color)
            sys.exit(2)
        except PlanningError as exc:
            _echo_error(str(exc), no_color)
            sys.exit(1)
        except OSError as exc:
            _echo_error(str(exc), no_color)
            sys.exit(2)

    return wrapper


no_color_option = click.option(
    "--no-color", is_flag=True, default=False, help="Disable colored output."
)


@click.group()
def main() -> None:
    """Interactive planning engine: tree decomposition with scoped context."""


def _load_provider_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BadConfig(f"cannot read provider config: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise BadConfig(f"provider config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise BadConfig("provider config must be a JSON object")
    return data


def _build_provider(config_data: dict):
    kind = config_data.get("provider", "live")
    if kind == "mock":
        script_path = config_data.get("script")
        if not script_path:
            raise BadConfig("mock provider config requires a 'script' path")
        return MockProvider(ProviderScript.from_file(script_path))
    if kind != "live":
        raise BadConfig(f"unknown provider kind {kind!r}")
    base = ProviderConfig.from_env()
    provider_config = ProviderConfig(
        endpoint=config_data.get("endpoint", base.endpoint),
        model=config_data.get("model", base.model),
        api_key_env=config_data.get("api_key_env", base.api_key_env),
        timeout_seconds=float(config_data.get("timeout_seconds", base.timeout_seconds)),
    )
    if not provider_config.endpoint:
        raise BadConfig("live provider requires an endpoint (config file or PLANKIT_ENDPOINT)")
    return LiveProvider(provider_config)


@main.command()
@click.option("--addr", default="127.0.0.1:8765", show_default=True, help="host:port to listen on.")
@click.option(
    "--sessions-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("./sessions"),
    show_default=True,
)
@click.option("--mode", default=AblationMode.FULL_CURATION.value, show_default=True)
@click.option("--strategy", default=DetectionVariant.FEW_SHOT_COT_TREE.value, show_default=True)
@click.option("--provider-config", type=click.Path(path_type=str), default=None)
@no_color_option
@click.pass_context
@handle_errors
def serve(ctx: click.Context, addr: str, sessions_dir: Path, mode: str, strategy: str, provider_config: str | None, no_color: bool) -> None:
    """Start the HTTP service."""
    import uvicorn

    from .service_api import create_app

    config_data = _load_provider_config(provider_config)
    # The config file may carry the same keys as the flags; explicit flags win.
    def flag_default(name: str, current):
        source = ctx.get_parameter_source(name)
        if source is not None and source.name != "DEFAULT":
            return current
        return config_data.get(name, current)

    addr = flag_default("addr", addr)
    mode = flag_default("mode", mode)
    strategy = flag_default("strategy", strategy)
    sessions_dir = Path(flag_default("sessions_dir", sessions_dir))

    try:
        parsed_mode = AblationMode(mode)
    except ValueError:
        raise BadConfig(f"unknown mode {mode!r}; valid: {[m.value for m in AblationMode]}") from None
    try:
        parsed_strategy = DetectionVariant(strategy)
    except ValueError:
        raise BadConfig(
            f"unknown strategy {strategy!r}; valid: {[v.value for v in DetectionVariant]}"
        ) from None
    host, _, port_text = addr.partition(":")
    try:
        port = int(port_text)
    except ValueError:
        raise BadConfig(f"--addr must be host:port, got {addr!r}") from None

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise AddrInUse(f"cannot bind {addr}: {exc}") from None
    finally:
        probe.close()

    provider = _build_provider(config_data)
    app = create_app(
        provider,
        sessions_dir=sessions_dir,
        config=EngineConfig(mode=parsed_mode, strategy=parsed_strategy),
    )
    click.echo(f"listening on http://{addr} (sessions in {sessions_dir})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option(
    "--script",
    "script_path",
    type=click.Path(path_type=str),
    default=str(DEFAULT_SCRIPT_PATH),
    show_default=False,
    help="Mock provider script (defaults to the bundled scenario).",
)
@click.option("--out", "out_path", type=click.Path(path_type=str), required=True)
@no_color_option
@handle_errors
def walkthrough(script_path: str, out_path: str, no_color: bool) -> None:
    """Replay the bundled planning scenario and write the session file."""
    session = run_walkthrough(script_path, out_path)
    click.echo(
        f"walkthrough complete: {len(session.tree)} nodes, "
        f"{len(session.events)} events -> {out_path}"
    )


@main.command(name="eval")
@click.option("--suite", "suite_path", type=click.Path(path_type=str), default=str(SUITE_PATH))
@click.option(
    "--strategies",
    default=",".join(v.value for v in VARIANT_ORDER),
    show_default=False,
    help="Comma-separated strategy names (default: all six).",
)
@click.option("--runs", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--provider", "provider_kind", type=click.Choice(["mock", "live"]), default="mock")
@click.option("--provider-config", type=click.Path(path_type=str), default=None)
@click.option("--report", "report_path", type=click.Path(path_type=str), default=None)
@click.option("--parallelism", type=click.IntRange(min=1), default=4, show_default=True)
@no_color_option
@handle_errors
def eval_command(
    suite_path: str,
    strategies: str,
    runs: int,
    provider_kind: str,
    provider_config: str | None,
    report_path: str | None,
    parallelism: int,
    no_color: bool,
) -> None:
    """Run the subtask-detection benchmark and print the accuracy table.

    The mock provider is a deterministic oracle that answers every case
    correctly, useful for verifying the pipeline end to end.
    """
    suite = load_suite(suite_path)
    try:
        variants = [DetectionVariant(name.strip()) for name in strategies.split(",") if name.strip()]
    except ValueError as exc:
        raise BadConfig(f"unknown strategy in --strategies: {exc}") from None
    if provider_kind == "mock":
        provider = OracleProvider(suite)
        parallelism = 1  # keep scripted runs sequential and deterministic
    else:
        provider = _build_provider({**_load_provider_config(provider_config), "provider": "live"})
    report = run_eval(suite, variants, runs=runs, provider=provider, parallelism=parallelism)
    click.echo(render_report(report))
    if report_path:
        write_csv(report, report_path)
        click.echo(f"per-case records -> {report_path}")


@main.group()
def session() -> None:
    """Inspect saved session files."""


@session.command(name="show")
@click.argument("file", type=click.Path(path_type=str))
@click.option("--outline", "show_outline", is_flag=True, help="Print the task tree outline.")
@click.option("--context", "show_context", is_flag=True, help="Print context keys and provenance.")
@click.option("--events", "show_events", is_flag=True, help="Print the event log.")
@no_color_option
@handle_errors
def session_show(
    file: str, show_outline: bool, show_context: bool, show_events: bool, no_color: bool
) -> None:
    """Show a session file (summary by default)."""
    loaded = session_io.load(file)
    if show_outline:
        click.echo(loaded.tree.outline())
        return
    if show_context:
        for scope in ("global", "local"):
            for info in loaded.context.list_keys(session_io.Scope(scope)):
                click.echo(f"{info.key}: {info.provenance.value}")
        return
    if show_events:
        for event in loaded.events:
            click.echo(f"{event.seq:4d}  {event.at}  {event.kind.value}")
        return
    click.echo(f"id: {loaded.id}")
    click.echo(f"goal: {loaded.goal}")
    click.echo(f"mode: {loaded.mode.value}")
    click.echo(f"nodes: {len(loaded.tree)}")
    click.echo(f"context entries: {len(loaded.context.to_list())}")
    click.echo(f"events: {len(loaded.events)}")


if __name__ == "__main__":
    main()
