"""Command-line tool and HTTP service around the realization pipeline.

Both entry points funnel through :func:`run_pipeline`, so for identical inputs
the CLI and the service produce byte-identical artifacts. The service is
stateless beyond its preloaded dictionary: MMS text travels inline in the
request body.

Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 realization
failure. Environment overrides for the service: ``MMS_ANIM_DICT``,
``MMS_ANIM_PORT``, ``MMS_ANIM_HOST``, ``MMS_ANIM_PROFILE``.
"""

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .compose import RealizationError, RealizeOptions, Timeline, export_timeline, realize, segments_sidecar
from .dictionary import DictionaryError, GlossDictionary, dictionary_open
from .mms import Diagnostic, MmsParseError, parse_mms, validate
from .profile import SkeletonProfile, load_profile

OUTPUT_FORMATS = ("bvh", "json")


class ValidationFailure(ValueError):
    """Raised when a document fails validation; carries the diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = tuple(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True, eq=False)
class PipelineResult:
    data: bytes
    timeline: Timeline
    diagnostics: tuple[Diagnostic, ...]  # parse warnings + validation warnings


def run_pipeline(
    mms_text: str,
    dictionary: GlossDictionary,
    profile: SkeletonProfile | None = None,
    fps: float = 30.0,
    output_format: str = "bvh",
) -> PipelineResult:
    """Parse, validate, realize, and export one MMS document."""
    if output_format not in OUTPUT_FORMATS:
        raise ValueError(f"unsupported output format {output_format!r}")
    doc = parse_mms(mms_text)
    diagnostics = validate(doc, dictionary)
    errors = [d for d in diagnostics if d.severity == "error"]
    if errors:
        raise ValidationFailure(diagnostics)
    timeline = realize(doc, dictionary, profile=profile, options=RealizeOptions(fps=fps))
    data = export_timeline(dictionary.skeleton, timeline, output_format)
    return PipelineResult(data, timeline, doc.warnings + tuple(diagnostics))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mms-realize",
        description="Realize an MMS sign table into a composed skeletal animation.",
    )
    parser.add_argument("--mms", required=True, help="path to the MMS table (CSV)")
    parser.add_argument("--dict", dest="dictionary", help="gloss dictionary directory")
    parser.add_argument("--out", help="output animation file")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, default="bvh")
    parser.add_argument("--profile", help="skeleton profile JSON (default: built-in)")
    parser.add_argument("--fps", type=float, default=30.0, help="timeline frame rate")
    parser.add_argument("--segments", help="also write the segment index sidecar here")
    parser.add_argument(
        "--validate-only",
        action="store_true",
        help="only parse and validate; print diagnostics and write nothing",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        mms_text = Path(args.mms).read_text(encoding="utf-8")
        profile = load_profile(args.profile) if args.profile else None
        dictionary = None
        if args.dictionary:
            dictionary = dictionary_open(args.dictionary, profile)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2

    if args.validate_only:
        try:
            doc = parse_mms(mms_text)
            diagnostics = list(doc.warnings) + validate(doc, dictionary)
        except MmsParseError as exc:
            diagnostics = list(exc.diagnostics)
        for diag in diagnostics:
            print(diag)
        errors = sum(1 for d in diagnostics if d.severity == "error")
        print(f"{errors} errors")
        return 0 if errors == 0 else 1

    if not args.dictionary:
        print("--dict is required unless --validate-only is given", file=sys.stderr)
        return 2
    if not args.out:
        print("--out is required unless --validate-only is given", file=sys.stderr)
        return 2
    try:
        result = run_pipeline(
            mms_text, dictionary, profile=profile, fps=args.fps, output_format=args.format
        )
    except MmsParseError as exc:
        for diag in exc.diagnostics:
            print(diag, file=sys.stderr)
        return 1
    except ValidationFailure as exc:
        for diag in exc.diagnostics:
            print(diag, file=sys.stderr)
        return 1
    except (RealizationError, DictionaryError) as exc:
        print(f"realization failed: {exc}", file=sys.stderr)
        return 3
    for diag in result.diagnostics:
        print(diag, file=sys.stderr)
    for warning in result.timeline.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    try:
        Path(args.out).write_bytes(result.data)
        if args.segments:
            Path(args.segments).write_bytes(segments_sidecar(result.timeline))
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


def main_entry() -> None:
    raise SystemExit(main())


_MEDIA_TYPES = {"bvh": "application/octet-stream", "json": "application/json"}


def create_app(dictionary: GlossDictionary, default_fps: float = 30.0):
    """Build the HTTP application exposing /realize, /glosses, and /health."""
    from fastapi import FastAPI, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse, Response
    from pydantic import BaseModel, Field
    from typing import Literal, Optional

    class RealizeRequest(BaseModel):
        mms: str
        dictionary: Optional[str] = None
        profile: Optional[str] = None
        fps: Optional[float] = Field(default=None, gt=0)
        output_format: Literal["bvh", "json"] = "bvh"

    app = FastAPI(title="mmsanim", version=__version__)
    app.state.dictionary = dictionary
    app.state.default_fps = default_fps

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request", "detail": exc.errors()})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/glosses")
    def glosses():
        entries = [
            {"id": gloss, "nominal_duration": dictionary.nominal_duration(gloss)}
            for gloss in dictionary.gloss_ids()
        ]
        return {"glosses": entries}

    @app.post("/realize")
    def realize_endpoint(request: RealizeRequest):
        if request.dictionary is not None and request.dictionary != dictionary.directory.name:
            return JSONResponse(
                status_code=400,
                content={"error": f"unknown dictionary {request.dictionary!r}"},
            )
        if request.profile is not None and request.profile != "default":
            return JSONResponse(
                status_code=400, content={"error": f"unknown profile {request.profile!r}"}
            )
        try:
            result = run_pipeline(
                request.mms,
                dictionary,
                fps=request.fps or app.state.default_fps,
                output_format=request.output_format,
            )
        except MmsParseError as exc:
            return JSONResponse(
                status_code=422, content={"diagnostics": [str(d) for d in exc.diagnostics]}
            )
        except ValidationFailure as exc:
            return JSONResponse(
                status_code=422, content={"diagnostics": [str(d) for d in exc.diagnostics]}
            )
        except (RealizationError, DictionaryError) as exc:
            return JSONResponse(status_code=500, content={"error": f"realization failed: {exc}"})
        return Response(content=result.data, media_type=_MEDIA_TYPES[request.output_format])

    return app


def build_serve_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mms-serve", description="Serve the realization pipeline over HTTP."
    )
    parser.add_argument("--dict", dest="dictionary", default=os.environ.get("MMS_ANIM_DICT"))
    parser.add_argument("--profile", default=os.environ.get("MMS_ANIM_PROFILE"))
    parser.add_argument("--host", default=os.environ.get("MMS_ANIM_HOST", "127.0.0.1"))
    parser.add_argument("--port", type=int, default=int(os.environ.get("MMS_ANIM_PORT", "8000")))
    parser.add_argument("--fps", type=float, default=30.0)
    return parser


def serve(argv=None) -> int:
    args = build_serve_parser().parse_args(argv)
    if not args.dictionary:
        print("a dictionary is required (--dict or MMS_ANIM_DICT)", file=sys.stderr)
        return 2
    try:
        profile = load_profile(args.profile) if args.profile else None
        dictionary = dictionary_open(args.dictionary, profile)
        dictionary.skeleton  # fail fast on an unloadable dictionary
    except (OSError, DictionaryError) as exc:
        print(f"cannot open dictionary: {exc}", file=sys.stderr)
        return 2
    import uvicorn

    uvicorn.run(create_app(dictionary, default_fps=args.fps), host=args.host, port=args.port)
    return 0


def serve_entry() -> None:
    raise SystemExit(serve())
