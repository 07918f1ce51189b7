"""``model-bridge``: serve an entailment model behind the scorer protocol."""

from __future__ import annotations

import argparse
import sys

from .app import create_app
from .models import ModelLoadError, load_model


def serve(model_id: str, port: int, host: str = "127.0.0.1", entailment_label: str = "entailment") -> None:
    """Load the model (startup error on failure) and serve until interrupted."""
    import uvicorn

    model = load_model(model_id, entailment_label)
    uvicorn.run(create_app(model), host=host, port=port, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", default="overlap-v1", help="'overlap-v1' or 'hf:<checkpoint>'")
    parser.add_argument("--port", type=int, default=8646)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument(
        "--entailment-label",
        default="entailment",
        help="label of the entailment class in the checkpoint metadata",
    )
    args = parser.parse_args(argv)
    try:
        serve(args.model, args.port, args.host, args.entailment_label)
    except ModelLoadError as exc:
        print(f"error[startup]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
