import asyncio
import logging
import uuid
from contextlib import asynccontextmanager
from typing import Literal

import httpx
from fastapi import Depends, FastAPI, HTTPException, Response, status
from fastapi.security import APIKeyHeader
from pydantic import BaseModel, Field, model_validator

from .conf import conf
from .jobs import RunQueue, RunStore
from .models import builtin_models, builtin_text, parse_model
from .pipelines import (
    RunOptions,
    cmd_derive,
    cmd_noether,
    cmd_reproduce_paper,
    cmd_verify_classical,
    cmd_verify_quantum,
)
from .reports import RunReport, dumps
from .utils import send_post_request

# --------------------------------------------------------------------------- #
logger = logging.getLogger(conf.APP_NAME)
logging.basicConfig(level=conf.LOG_LEVEL, format=conf.LOG_FORMAT)

api_key_header = APIKeyHeader(name="X-API-Key", auto_error=False)


def validate_api_key(key: str | None = Depends(api_key_header)) -> None:
    """FastAPI dependency that aborts if the key is bad/missing."""
    if key is None or key != conf.API_KEY:
        raise HTTPException(
            status_code=status.HTTP_401_UNAUTHORIZED,
            detail="Invalid or missing API key",
        )


run_queue: RunQueue
run_store: RunStore


# --------------------------------------------------------------------------- #
# Run schema
# --------------------------------------------------------------------------- #
class RunIn(BaseModel):
    run_id: uuid.UUID = Field(default_factory=uuid.uuid4)
    command: Literal["derive", "noether", "verify-classical", "verify-quantum", "reproduce-paper"]
    model: str | None = None  # built-in model name
    model_text: str | None = None  # inline model file
    options: RunOptions = Field(default_factory=RunOptions)
    callback_url: str | None = None

    @model_validator(mode="after")
    def one_model_source(self):
        if self.model is not None and self.model_text is not None:
            raise ValueError("give either model or model_text, not both")
        return self


COMMANDS = {
    "derive": lambda model, options: cmd_derive(model, options),
    "noether": lambda model, options: cmd_noether(model, options),
    "verify-classical": lambda model, options: cmd_verify_classical(model, options),
    "verify-quantum": lambda model, options: cmd_verify_quantum(model, options),
    "reproduce-paper": lambda model, options: cmd_reproduce_paper(model, options),
}


def execute(run: RunIn) -> RunReport:
    """Blocking part of a run; executed in a worker thread."""
    if run.model_text is not None:
        model = parse_model(run.model_text, source=f"api:{run.run_id}")
    else:
        name = run.model or "bateman"
        model = parse_model(builtin_text(name), source=f"builtin:{name}")
    return COMMANDS[run.command](model, run.options)


# --------------------------------------------------------------------------- #
# FastAPI
# --------------------------------------------------------------------------- #
@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info("Started lifespan context.")

    global run_queue, run_store
    run_queue = RunQueue()
    run_store = RunStore(ttl=conf.RUN_RESULT_TTL)
    run_queue.start(process_run)
    logger.info("Started run worker and report store.")

    try:
        yield
    finally:
        await run_queue.close()
        logger.info("Stopped run worker.")


app = FastAPI(title=conf.APP_NAME, version=conf.APP_VERSION, lifespan=lifespan)


@app.get("/models/", dependencies=[Depends(validate_api_key)])
async def list_models() -> dict[str, list[str]]:
    return {"models": builtin_models()}


@app.post("/runs/", dependencies=[Depends(validate_api_key)], status_code=202)
async def enqueue_run(run: RunIn) -> dict[str, str]:
    await run_store.put(run.run_id, {"run_id": str(run.run_id), "status": "queued"})
    await run_queue.enqueue(run)
    return {"status": "queued", "run_id": str(run.run_id)}


@app.get("/runs/{run_id}", dependencies=[Depends(validate_api_key)])
async def get_run(run_id: uuid.UUID) -> Response:
    """Stored run entry, serialized with the same writer as ``report.json``."""
    entry = await run_store.get(run_id)

    if entry is None:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Run {run_id} not found or expired",
        )

    return Response(content=dumps(entry), media_type="application/json")


async def process_run(run: RunIn) -> None:
    entry = {
        "run_id": str(run.run_id),
        "command": run.command,
        "status": "processing",
    }
    await run_store.put(run.run_id, dict(entry))
    logger.info("Processing run %s (%s)", run.run_id, run.command)

    try:
        report = await asyncio.to_thread(execute, run)
        entry["status"] = "completed"
        entry["passed"] = report.passed
        entry["report"] = report
        logger.debug("Run %s finished: %r", run.run_id, report.summary())

    # a failed run is stored like a finished one
    except Exception as e:
        logger.exception("Error processing run %s", run.run_id)
        entry["status"] = "failed"
        entry["error"] = str(e)

    finally:
        await run_store.put(run.run_id, entry)
        logger.info("Finished run %s and stored report", run.run_id)
        if run.callback_url:
            await notify_callback(run, entry)


async def notify_callback(run: RunIn, entry: dict) -> bool:
    """POST the stored entry to ``run.callback_url``; False when it was not delivered."""
    try:
        await send_post_request(run.callback_url, entry)
    except httpx.HTTPStatusError as e:
        logger.error(
            "Callback for run %s rejected by %s with status %s",
            run.run_id,
            run.callback_url,
            e.response.status_code,
        )
    except httpx.HTTPError as e:
        logger.error("Callback for run %s could not reach %s: %s", run.run_id, run.callback_url, e)
    except Exception:
        logger.exception("Callback for run %s failed", run.run_id)
    else:
        logger.debug("Delivered run %s to %s", run.run_id, run.callback_url)
        return True
    return False
