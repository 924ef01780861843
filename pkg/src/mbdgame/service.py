"""Local HTTP/JSON play service: sessions, human moves, engine replies and
position evaluation for the browser board.

Engine replies are computed synchronously under a per-session node budget;
when the exact engine cannot finish inside the budget it answers with the
best bounded move and says so (``exact: false``) instead of pretending.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .game import GameRecord, GameStatus, Player, Position
from .graphs import ids_from_mask, iter_bits
from .kernel import BACKEND, INF, NodeLimitExceeded
from .solver import GameValue, KernelSession, SolveConfig
from .strategies import Strategy, detect_traps

#: node budgets standing in for the interactive time budget
_ENGINE_NODE_BUDGET = 4_000_000 if BACKEND == "cython" else 150_000


class CreateSessionRequest(BaseModel):
    board: str
    human_side: str  # "dominator" | "staller"
    engine: str = "exact"  # "exact" | "strategy:<name>"
    first_mover: Optional[str] = None  # default: the board's own starting side


class MoveRequest(BaseModel):
    vertex: int | str


@dataclass
class SessionState:
    id: str
    position: Position
    human: Player
    engine_name: str
    record: GameRecord
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    strategy: Optional[Strategy] = None
    strategy_state: object = None
    exact: Optional[KernelSession] = None
    last_human_move: Optional[int] = None

    @property
    def engine_side(self) -> Player:
        return self.human.opponent


def _engine_factory(name: str, pos: Position, max_exact_vertices: int):
    if name == "exact":
        if pos.graph.n > max_exact_vertices:
            raise HTTPException(
                422,
                detail={
                    "code": "board-too-large",
                    "reason": f"exact engine capped at {max_exact_vertices} vertices",
                },
            )
        return None, KernelSession(
            pos.graph, pos.predom, SolveConfig(node_limit=_ENGINE_NODE_BUDGET)
        )
    if name.startswith("strategy:"):
        from .cli import _strategy_by_name, UsageError

        try:
            strat = _strategy_by_name(name.split(":", 1)[1], pos)
        except UsageError as exc:
            raise HTTPException(422, detail={"code": "unknown-strategy", "reason": str(exc)})
        if not strat.accepts(pos):
            raise HTTPException(
                422, detail={"code": "strategy-domain", "reason": "strategy rejects this board"}
            )
        return strat, None
    raise HTTPException(422, detail={"code": "unknown-engine", "reason": name})


def _payload(sess: SessionState) -> dict:
    pos = sess.position
    st = pos.status()
    return {
        "id": sess.id,
        "position": pos.to_json_dict(),
        "human_side": sess.human.value,
        "engine": sess.engine_name,
        "status": {
            "kind": st.kind,
            "isolated_vertex": st.isolated_vertex,
            "isolated_label": (
                pos.graph.label_of(st.isolated_vertex)
                if st.isolated_vertex is not None
                else None
            ),
        },
        "dominated": ids_from_mask(pos.dominated_vertices()),
        "labels": list(pos.graph.labels) if pos.graph.labels else None,
        "record": sess.record.to_json_dict()["moves"],
        "to_move": pos.to_move.value,
    }


def create_app(
    engine_default: str = "exact",
    max_exact_vertices: int = 16,
    time_budget_s: float = 2.0,
    record_log_path: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="mbd play service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, SessionState] = {}

    def engine_move(sess: SessionState) -> tuple[Optional[int], str, bool]:
        """-> (vertex, annotation, exact?)"""
        pos = sess.position
        if sess.strategy is not None:
            mv, sess.strategy_state, note = sess.strategy.respond(
                sess.strategy_state, pos, sess.last_human_move
            )
            return mv, note, True
        try:
            mv = sess.exact.best_move(pos)
            return mv, "exact engine", True
        except NodeLimitExceeded:
            # bounded fallback: highest immediate coverage / lowest index
            best_v, best_gain = None, -1
            unc = pos.graph.full_mask & ~pos.dominated_vertices()
            for v in iter_bits(pos.free):
                gain = (pos.graph.closed_adj[v] & unc).bit_count()
                if gain > best_gain:
                    best_v, best_gain = v, gain
            return best_v, "budget-bounded move (not exact)", False

    def apply_engine_reply(sess: SessionState) -> None:
        if sess.position.status().is_terminal:
            return
        if sess.position.to_move is not sess.engine_side:
            return
        mv, note, exact = engine_move(sess)
        sess.record.append(sess.engine_side, mv, note if exact else note)
        sess.position = sess.position.apply_move(mv)

    def get_session(sid: str) -> SessionState:
        sess = sessions.get(sid)
        if sess is None:
            raise HTTPException(404, detail={"code": "no-session", "reason": sid})
        return sess

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        from .cli import board_from_spec, UsageError

        try:
            pos = board_from_spec(req.board)
        except (UsageError, ValueError) as exc:
            raise HTTPException(422, detail={"code": "bad-board", "reason": str(exc)})
        try:
            human = Player(req.human_side)
        except ValueError:
            raise HTTPException(422, detail={"code": "bad-side", "reason": req.human_side})
        if req.first_mover is not None:
            try:
                first = Player(req.first_mover)
            except ValueError:
                raise HTTPException(422, detail={"code": "bad-side", "reason": req.first_mover})
            from dataclasses import replace

            pos = replace(pos, to_move=first)
        strategy, exact = _engine_factory(req.engine, pos, max_exact_vertices)
        sid = secrets.token_hex(8)
        sess = SessionState(
            id=sid,
            position=pos,
            human=human,
            engine_name=req.engine,
            record=GameRecord(pos),
            strategy=strategy,
            strategy_state=strategy.initial_state(pos) if strategy else None,
            exact=exact,
        )
        with sess.lock:
            apply_engine_reply(sess)
        sessions[sid] = sess
        return _payload(sess)

    @app.get("/sessions/{sid}")
    def get_session_payload(sid: str):
        return _payload(get_session(sid))

    @app.post("/sessions/{sid}/moves")
    def post_move(sid: str, req: MoveRequest):
        sess = get_session(sid)
        with sess.lock:
            pos = sess.position
            if pos.status().is_terminal:
                raise HTTPException(
                    409, detail={"code": "game-over", "reason": pos.status().kind}
                )
            if pos.to_move is not sess.human:
                raise HTTPException(
                    409, detail={"code": "not-your-turn", "reason": pos.to_move.value}
                )
            vertex = req.vertex
            if isinstance(vertex, str) and not vertex.isdigit():
                try:
                    vertex = pos.graph.index_of_label(vertex)
                except Exception:
                    raise HTTPException(
                        422, detail={"code": "bad-vertex", "reason": str(req.vertex)}
                    )
            vertex = int(vertex)
            if not (0 <= vertex < pos.graph.n) or not pos.free & (1 << vertex):
                raise HTTPException(
                    409,
                    detail={
                        "code": "illegal-move",
                        "reason": f"vertex {req.vertex} is not a free cell",
                    },
                )
            # atomic: apply human move and engine reply together or neither
            saved_pos, saved_state = sess.position, sess.strategy_state
            saved_len = len(sess.record.moves)
            try:
                sess.record.append(sess.human, vertex, "human")
                sess.position = pos.apply_move(vertex)
                sess.last_human_move = vertex
                apply_engine_reply(sess)
            except Exception:
                sess.position, sess.strategy_state = saved_pos, saved_state
                del sess.record.moves[saved_len:]
                raise
            return _payload(sess)

    @app.get("/sessions/{sid}/eval")
    def eval_position(sid: str):
        sess = get_session(sid)
        with sess.lock:
            pos = sess.position
            traps = [
                {
                    "kind": t.kind.value,
                    "column": t.column,
                    "row": t.row,
                    "threatened": t.threatened,
                    "reply": t.reply,
                }
                for t in detect_traps(pos)
            ]
            payload: dict = {
                "traps": traps,
                "dominated": ids_from_mask(pos.dominated_vertices()),
                "exhausted": False,
                "value": None,
                "best_move": None,
            }
            st = pos.status()
            if st.is_terminal:
                payload["value"] = (
                    GameValue.dominator_win(0) if st.kind == GameStatus.DOMINATOR_WIN
                    else GameValue.staller_win()
                ).to_json_dict()
                return payload
            if pos.graph.n > max_exact_vertices:
                payload["exhausted"] = True
                payload["note"] = "board beyond the exact-evaluation cap"
                return payload
            sess.exact = sess.exact or KernelSession(
                pos.graph, pos.predom, SolveConfig(node_limit=_ENGINE_NODE_BUDGET)
            )
            try:
                payload["value"] = GameValue.from_rank(sess.exact.rank_of(pos)).to_json_dict()
                payload["best_move"] = sess.exact.best_move(pos)
            except NodeLimitExceeded:
                payload["exhausted"] = True
                payload["note"] = "node budget exhausted; value is a bound only"
            return payload

    @app.delete("/sessions/{sid}")
    def delete_session(sid: str):
        get_session(sid)
        del sessions[sid]
        return {"deleted": sid}

    return app
