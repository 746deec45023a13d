"""FastAPI application entry point."""

from __future__ import annotations

import logging

from fastapi import FastAPI, WebSocket

from app.config import settings
from app.api.routes import router
from app.api.ws import websocket_handler

logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
)

app = FastAPI(title="loopcalc LDPC decoding lab")


@app.on_event("startup")
async def startup_warm_codes():
    """Build the code library and the Tanner-155 polytope in the background."""
    import asyncio
    from app.code.construct import get_code, library_names
    from app.lp.decoder import forbidden_set_polytope

    def _warm() -> int:
        for name in library_names():
            get_code(name)
        return forbidden_set_polytope(get_code("tanner155"))[0].shape[0]

    async def _load():
        try:
            rows = await asyncio.to_thread(_warm)
            logging.getLogger(__name__).info("Code library ready: Tanner-155 polytope has %d rows", rows)
        except Exception as e:
            logging.getLogger(__name__).warning("Code library warm-up failed: %s", e)

    asyncio.create_task(_load())


# REST API
app.include_router(router)

# WebSocket
@app.websocket("/ws")
async def ws_endpoint(websocket: WebSocket):
    await websocket_handler(websocket)


def main():
    import uvicorn
    uvicorn.run(
        "app.main:app",
        host=settings.host,
        port=settings.port,
        reload=False,
        ws_ping_interval=30,
        ws_ping_timeout=30,
    )


if __name__ == "__main__":
    main()
