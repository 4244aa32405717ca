"""HTTP and websocket surface.

REST carries resources (plans, garden, health, notifications, usage); the
websocket carries chat frames under the ``bloom-proto/1`` subprotocol. Every
route authenticates a bearer token before touching any state.
"""

from __future__ import annotations

import json
import logging
from datetime import date

from fastapi import Depends, FastAPI, HTTPException, Request, WebSocket, WebSocketDisconnect

from .auth import TokenRegistry
from .errors import AuthError, ConflictError, NoPlanError, NotFoundError, ValidationError
from .frames import PROTOCOL_VERSION
from .runtime import CoachingService

logger = logging.getLogger(__name__)

_DOMAIN_STATUS = {
    ValidationError: 422,
    NotFoundError: 404,
    ConflictError: 409,
    NoPlanError: 404,
}


def _http_error(exc: Exception) -> HTTPException:
    for kind, status in _DOMAIN_STATUS.items():
        if isinstance(exc, kind):
            return HTTPException(status_code=status, detail=str(exc))
    raise exc


def create_app(service: CoachingService, registry: TokenRegistry) -> FastAPI:
    # No unauthenticated surface at all, including generated docs.
    app = FastAPI(title="bloom-coach", version="0.1.0",
                  docs_url=None, redoc_url=None, openapi_url=None)
    app.state.service = service
    app.state.registry = registry

    def current_user(request: Request) -> str:
        try:
            return registry.authenticate(request.headers.get("authorization"),
                                         now=service.clock())
        except AuthError as exc:
            raise HTTPException(status_code=401,
                                detail={"code": exc.code, "message": str(exc)})

    @app.get("/plans/current")
    def get_plan(user: str = Depends(current_user)):
        plan = service.current_plan(user)
        if plan is None:
            raise HTTPException(status_code=404, detail="no current plan")
        return plan

    @app.put("/plans/current")
    async def put_plan(request: Request, user: str = Depends(current_user)):
        try:
            return service.replace_plan(user, await request.json())
        except (ValidationError, NotFoundError, ConflictError, NoPlanError) as exc:
            raise _http_error(exc)

    @app.post("/plans/current/workouts")
    async def post_workout(request: Request, user: str = Depends(current_user)):
        try:
            return service.add_workout_ui(user, await request.json())
        except (ValidationError, NotFoundError, ConflictError, NoPlanError) as exc:
            raise _http_error(exc)

    @app.delete("/plans/current/workouts/{workout_id}")
    def delete_workout(workout_id: str, user: str = Depends(current_user)):
        try:
            return service.delete_workout_ui(user, workout_id)
        except (ValidationError, NotFoundError, ConflictError, NoPlanError) as exc:
            raise _http_error(exc)

    @app.put("/plans/current/workouts/{workout_id}/complete")
    def complete_workout(workout_id: str, user: str = Depends(current_user)):
        try:
            return service.mark_complete_ui(user, workout_id)
        except (ValidationError, NotFoundError, ConflictError, NoPlanError) as exc:
            raise _http_error(exc)

    @app.get("/garden")
    def get_garden(user: str = Depends(current_user)):
        return service.garden_descriptor(user)

    @app.post("/garden/advance-week")
    def advance_week(user: str = Depends(current_user)):
        return service.advance_week(user)

    @app.post("/health/samples")
    async def post_samples(request: Request, user: str = Depends(current_user)):
        body = await request.json()
        batch = body if isinstance(body, list) else body.get("samples", [])
        return service.ingest_health(user, batch)

    @app.get("/health/guideline")
    def get_guideline(weekStart: str, user: str = Depends(current_user)):
        try:
            week_start = date.fromisoformat(weekStart)
        except ValueError:
            raise HTTPException(status_code=422, detail="weekStart must be YYYY-MM-DD")
        return service.guideline(user, week_start)

    @app.get("/notifications")
    def get_notifications(user: str = Depends(current_user)):
        return service.notification_records(user)

    @app.post("/notifications/fire-due")
    def fire_due(user: str = Depends(current_user)):
        return service.fire_due_notifications(user)

    @app.post("/usage/events")
    async def post_usage(request: Request, user: str = Depends(current_user)):
        try:
            return service.record_usage_event(user, await request.json())
        except ValidationError as exc:
            raise _http_error(exc)

    @app.websocket("/ws/chat")
    async def chat_socket(websocket: WebSocket):
        token = websocket.query_params.get("token")
        authorization = websocket.headers.get("authorization")
        try:
            if authorization:
                user = registry.authenticate(authorization, now=service.clock())
            else:
                user = registry.authenticate_token(token, now=service.clock())
        except AuthError as exc:
            await websocket.close(code=4401, reason=f"{exc.code}: {exc}")
            return
        subprotocol = None
        if PROTOCOL_VERSION in websocket.scope.get("subprotocols", []):
            subprotocol = PROTOCOL_VERSION
        await websocket.accept(subprotocol=subprotocol)
        channel = service.open_channel(user)
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    inbound = json.loads(raw)
                except json.JSONDecodeError:
                    inbound = None  # not an object; channel reports it
                for frame in channel.handle(inbound if isinstance(inbound, dict) else {}):
                    await websocket.send_text(json.dumps(frame))
        except WebSocketDisconnect:
            logger.debug("websocket closed for %s", user)

    return app
