"""Operator command line: pipeline steps, serving, deploys, and one-shot
predictions, with text or JSON output for scripting."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from .errors import EnerfitError
from .orchestrate import (
    ALL_STEPS,
    ArtifactStore,
    Orchestrator,
    load_config_file,
    validate_run_config,
)
from .serve.predictor import ModelCache

_STEP_BY_COMMAND = {
    "ingest": ["Ingestion"],
    "train": ["Training"],
    "evaluate": ["Evaluation"],
    "run-all": list(ALL_STEPS),
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--artifact-root", default="artifacts", help="artifact store directory")
    parser.add_argument("--output", choices=("text", "json"), default="text")


def _add_pipeline(sub, name: str, help_text: str) -> None:
    parser = sub.add_parser(name, help=help_text)
    parser.add_argument("--config", required=True, help="YAML or JSON run config")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (last wins); values parse as YAML",
    )
    _add_common(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="enerfit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    _add_pipeline(sub, "ingest", "run the ingestion step")
    _add_pipeline(sub, "train", "run the training step (needs ingest artifacts via from_run)")
    _add_pipeline(sub, "evaluate", "run the evaluation step (needs a prior run via from_run)")
    _add_pipeline(sub, "run-all", "run ingestion, training, and evaluation")

    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--listen", default="127.0.0.1:8000", metavar="HOST:PORT")
    serve.add_argument("--api-key", action="append", default=[], help="accepted API key (repeatable)")
    serve.add_argument("--no-auth", action="store_true", help="disable API-key auth")
    serve.add_argument("--static-dir", default=None, help="serve a built dashboard from this directory")
    _add_common(serve)

    predict = sub.add_parser("predict", help="one-shot prediction against the deployed model")
    predict.add_argument("--service", choices=("retrofit", "pv"), required=True)
    predict.add_argument("--body", default="-", help="JSON body file, or - for stdin")
    _add_common(predict)

    deploy = sub.add_parser("deploy", help="deploy a checkpoint to a service")
    deploy.add_argument("--service", choices=("retrofit", "pv"), required=True)
    deploy.add_argument("--checkpoint", required=True, help="checkpoint directory")
    _add_common(deploy)

    return parser


def _apply_overrides(config: dict, overrides: list[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise EnerfitError(f"override {item!r} must look like key=value")
        key, _, raw_value = item.partition("=")
        config[key.strip()] = yaml.safe_load(raw_value)
    return config


def _load_run_config(args) -> dict:
    config_path = Path(args.config)
    config = load_config_file(config_path)
    config = _apply_overrides(config, args.overrides)
    # Relative dataset paths resolve against the config file's directory.
    source = config.get("input_filepath")
    if isinstance(source, str) and source and "://" not in source:
        candidate = (config_path.parent / source).resolve()
        if not Path(source).is_absolute() and candidate.is_file():
            config["input_filepath"] = str(candidate)
    return config


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.output == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _run_pipeline(args) -> int:
    raw = _load_run_config(args)
    config = validate_run_config(raw)
    store = ArtifactStore(args.artifact_root)
    orchestrator = Orchestrator(store)
    run_id = orchestrator.launch(config, _STEP_BY_COMMAND[args.command])
    record = orchestrator.wait(run_id)
    payload = record.to_dict()
    lines = [f"run {run_id}: {record.status}"]
    for step_name in record.requested_steps:
        step = record.steps[step_name]
        lines.append(f"  {step_name}: {step.status}")
        for artifact in step.artifacts:
            lines.append(f"    {store.run_dir(run_id) / artifact}")
    if record.status != "Succeeded":
        detail = record.error or {}
        lines.append(f"error: {detail.get('message', 'unknown failure')}")
        _emit(args, payload, lines)
        print(f"error: {detail.get('message', 'run failed')}", file=sys.stderr)
        return 1
    metrics = store.run_dir(run_id) / "eval" / "metrics.json"
    if metrics.is_file():
        lines.append(f"metrics: {metrics}")
        payload["metrics_path"] = str(metrics)
    _emit(args, payload, lines)
    return 0


def _run_serve(args) -> int:
    import uvicorn

    from .serve.app import ServeSettings, create_app

    host, _, port_text = args.listen.partition(":")
    port = int(port_text or "8000")
    auth_enabled = not args.no_auth
    if auth_enabled and not args.api_key:
        print("error: pass --api-key (repeatable) or --no-auth", file=sys.stderr)
        return 1
    settings = ServeSettings(
        artifact_root=Path(args.artifact_root),
        api_keys=tuple(args.api_key),
        auth_enabled=auth_enabled,
        static_dir=Path(args.static_dir) if args.static_dir else None,
    )
    app = create_app(settings)
    uvicorn.run(app, host=host or "127.0.0.1", port=port, log_level="info")
    return 0


def _run_predict(args) -> int:
    from .serve.predictor import predict

    if args.body == "-":
        body = json.load(sys.stdin)
    else:
        with open(args.body, "r", encoding="utf-8") as fh:
            body = json.load(fh)
    store = ArtifactStore(args.artifact_root)
    loaded = ModelCache(store).active(args.service)
    response = predict(args.service, loaded, body)
    lines = [f"service: {args.service}", f"model_version: {response['model_version']}"]
    for name, value in response["outputs"].items():
        lines.append(f"  {name}: {value}")
    if response["imputed_fields"]:
        lines.append(f"imputed: {', '.join(response['imputed_fields'])}")
    _emit(args, response, lines)
    return 0


def _run_deploy(args) -> int:
    store = ArtifactStore(args.artifact_root)
    info = store.deploy(args.service, args.checkpoint)
    _emit(
        args,
        info.to_dict(),
        [f"deployed {args.service} {info.version} from {args.checkpoint}"],
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "ingest": _run_pipeline,
        "train": _run_pipeline,
        "evaluate": _run_pipeline,
        "run-all": _run_pipeline,
        "serve": _run_serve,
        "predict": _run_predict,
        "deploy": _run_deploy,
    }
    try:
        return handlers[args.command](args)
    except EnerfitError as exc:
        if args.output == "json":
            print(json.dumps(exc.to_dict(), indent=2, sort_keys=True))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
