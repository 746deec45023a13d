"""WebSocket handler for streaming campaign progress."""

from __future__ import annotations

import asyncio
import logging
import time
import uuid

from fastapi import WebSocket, WebSocketDisconnect
from pydantic import ValidationError

from app.channel.awgn import trial_seed
from app.code.construct import SMALL_GRAPH_SUITE, get_code, resolve_served_code
from app.experiments.runner import correction_rows, fer_trial, wilson_interval, zcheck_code
from app.instanton.search import load_instanton_catalog, search_instanton
from app.models.schemas import CampaignKind, ExperimentConfig

logger = logging.getLogger(__name__)

# Active campaigns: campaign_id -> cancel event
_campaigns: dict[str, asyncio.Event] = {}

# Keepalive interval (seconds)
_PING_INTERVAL = 20

# Consecutive unit failures before a campaign is abandoned
_MAX_CONSECUTIVE_ERRORS = 10


async def _send(ws: WebSocket, event_type: str, data: dict) -> bool:
    """Send a JSON event over WebSocket. Returns False if connection is dead."""
    try:
        await ws.send_json({"type": event_type, "data": data})
        return True
    except Exception:
        return False


async def _keepalive(ws: WebSocket, stop_event: asyncio.Event) -> None:
    while not stop_event.is_set():
        try:
            await asyncio.sleep(_PING_INTERVAL)
            if stop_event.is_set():
                break
            await ws.send_json({"type": "ping", "data": {"ts": time.time()}})
        except Exception:
            break


def _units(config: ExperimentConfig):
    """(label, callable) work units of a campaign, in report order."""
    if config.kind == CampaignKind.ZCHECK_SUITE:
        for name in SMALL_GRAPH_SUITE:
            yield name, lambda name=name: [zcheck_code(get_code(name), config.zcheck_draws, config.master_seed).model_dump()]
        return

    code = resolve_served_code(config.code)
    if config.kind == CampaignKind.FER_SWEEP:
        for k, s2 in enumerate(config.s2_grid):
            for t in range(config.seeds):
                job = (s2, t, trial_seed(config.master_seed, k * config.seeds + t))
                yield f"s2={s2} trial={t}", lambda job=job: [fer_trial(code, config.epsilon, job)]
        return

    if config.catalog:
        for index, record in enumerate(load_instanton_catalog(config.catalog)):
            yield f"instanton {index}", lambda i=index, r=record: [
                row.model_dump() for row in correction_rows(code, config, (i, r))
            ]
        return

    for index, seed in enumerate(range(config.master_seed, config.master_seed + config.seeds)):
        def unit(i=index, s=seed):
            record = search_instanton(code, s)
            if record is None:
                return []
            return [row.model_dump() for row in correction_rows(code, config, (i, record))]

        yield f"seed {seed}", unit


async def _run_campaign(ws: WebSocket, campaign_id: str, config: ExperimentConfig) -> None:
    """Run a campaign unit by unit, streaming each row."""
    stop_event = _campaigns[campaign_id]
    await _send(ws, "status", {"campaign_id": campaign_id, "status": "running", "kind": config.kind.value})

    unit_count = 0
    error_count = 0
    failures: dict[str, int] = {}
    trials: dict[str, int] = {}
    final_status = "done"

    try:
        for label, unit in _units(config):
            if stop_event.is_set():
                final_status = "stopped"
                break
            unit_count += 1
            try:
                rows = await asyncio.to_thread(unit)
                for row in rows:
                    if config.kind == CampaignKind.FER_SWEEP:
                        key = str(row["s2"])
                        trials[key] = trials.get(key, 0) + 1
                        failures[key] = failures.get(key, 0) + int(row["lp_failed"])
                    if not await _send(ws, "row", {"unit": label, **row}):
                        logger.warning("WebSocket send failed, stopping campaign")
                        stop_event.set()
                        break
                error_count = 0
            except Exception as e:
                logger.warning("Unit %s failed: %s", label, e)
                error_count += 1
                await _send(ws, "error", {"message": f"{label}: {str(e)[:100]}"})

            if error_count >= _MAX_CONSECUTIVE_ERRORS:
                logger.error("%d consecutive errors, stopping campaign", _MAX_CONSECUTIVE_ERRORS)
                await _send(ws, "error", {"message": f"{_MAX_CONSECUTIVE_ERRORS} consecutive errors, campaign stopped"})
                final_status = "error"
                break

    except asyncio.CancelledError:
        logger.info("Campaign cancelled: %s", campaign_id)
        final_status = "stopped"
    except Exception as e:
        logger.exception("Campaign error: %s", campaign_id)
        await _send(ws, "error", {"message": str(e)})
        final_status = "error"
    finally:
        summary = {
            s2: {"trials": n, "lp_failures": failures[s2], "lp_ci": wilson_interval(failures[s2], n)}
            for s2, n in trials.items()
        }
        await _send(ws, "status", {
            "campaign_id": campaign_id,
            "status": final_status,
            "units_processed": unit_count,
            **({"fer": summary} if summary else {}),
        })


async def websocket_handler(ws: WebSocket) -> None:
    """Handle a WebSocket connection driving one campaign at a time."""
    await ws.accept()
    campaign_id = uuid.uuid4().hex[:8]
    logger.info("WebSocket connected: campaign=%s", campaign_id)

    task: asyncio.Task | None = None
    keepalive_stop = asyncio.Event()
    keepalive_task = asyncio.create_task(_keepalive(ws, keepalive_stop))

    try:
        while True:
            try:
                data = await asyncio.wait_for(ws.receive_json(), timeout=300)
            except asyncio.TimeoutError:
                continue

            action = data.get("action")

            if action == "start":
                try:
                    config = ExperimentConfig.model_validate(data.get("config", {}), context={"served": True})
                except ValidationError as e:
                    await _send(ws, "error", {"message": str(e)[:300]})
                    continue

                if task and not task.done():
                    _campaigns[campaign_id].set()
                    task.cancel()
                    try:
                        await task
                    except (asyncio.CancelledError, Exception):
                        pass

                _campaigns[campaign_id] = asyncio.Event()
                task = asyncio.create_task(_run_campaign(ws, campaign_id, config))
                logger.info("Campaign started: id=%s kind=%s code=%s", campaign_id, config.kind.value, config.code)

            elif action == "stop":
                if campaign_id in _campaigns:
                    _campaigns[campaign_id].set()
                if task and not task.done():
                    task.cancel()
                logger.info("Campaign stop requested: id=%s", campaign_id)

            elif action == "pong":
                pass

    except WebSocketDisconnect:
        logger.info("WebSocket disconnected: campaign=%s", campaign_id)
    except Exception as e:
        logger.warning("WebSocket handler error: campaign=%s, %s", campaign_id, e)
    finally:
        keepalive_stop.set()
        keepalive_task.cancel()
        if campaign_id in _campaigns:
            _campaigns[campaign_id].set()
        if task and not task.done():
            task.cancel()
        _campaigns.pop(campaign_id, None)
