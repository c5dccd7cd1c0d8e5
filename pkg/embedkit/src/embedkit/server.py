"""HTTP embedding service: POST /embed.

Single-model server matching the retrieval CLI's embedder contract:
request ``{"texts": [string...], "model": string}`` answers
``{"dim": int, "vectors": [[float...]...]}`` with unit-normalized rows.
Malformed JSON is a 400; an empty text list (or a model mismatch) is a
422. Requests run through the same preprocessing as batch export so both
paths produce identical vectors for identical texts.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .export import encode_texts
from .models import Encoder, load_encoder
from .preprocess import TextPreprocessor


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)
    model: str | None = None


class EmbedResponse(BaseModel):
    dim: int
    vectors: list[list[float]]


def create_app(
    encoder: Encoder,
    preprocess: TextPreprocessor | None = None,
) -> FastAPI:
    """Build the app around one loaded encoder."""
    preprocess = preprocess or TextPreprocessor()
    app = FastAPI(title="embedkit", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        # undecodable body -> 400; schema violations (e.g. empty texts) -> 422
        if any(e.get("type") == "json_invalid" for e in exc.errors()):
            return JSONResponse(status_code=400, content={"detail": "malformed JSON"})
        return JSONResponse(status_code=422, content={"detail": exc.errors()})

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "model": encoder.name, "dim": encoder.dim}

    @app.post("/embed", response_model=EmbedResponse)
    async def embed(req: EmbedRequest):
        if req.model is not None and req.model != encoder.name:
            return JSONResponse(
                status_code=422,
                content={"detail": f"server loaded {encoder.name!r}, not {req.model!r}"},
            )
        vectors = encode_texts(encoder, req.texts, preprocess)
        return {"dim": encoder.dim, "vectors": vectors.tolist()}

    return app


def serve_embed(model_name: str, port: int, host: str = "127.0.0.1") -> None:
    """Load the model, then serve /embed until interrupted."""
    import uvicorn

    app = create_app(load_encoder(model_name))
    uvicorn.run(app, host=host, port=port, log_level="warning")
