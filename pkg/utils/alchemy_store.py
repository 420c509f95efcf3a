# utils/alchemy_store.py
"""本地 SQLite 状态库：运行登记表与采集端高水位共用的引擎缓存和执行入口"""
from __future__ import annotations

import atexit
import logging
import threading
import time
from pathlib import Path
from typing import Any

from sqlalchemy import create_engine, event, text
from sqlalchemy.engine import Engine
from sqlalchemy.exc import SQLAlchemyError

logger = logging.getLogger('store')

MEMORY = ':memory:'

# 键为 sqlite URL；采集线程与主线程可能同时取引擎
_engines: dict[str, Engine] = {}
_opened_at: dict[str, float] = {}
_engines_lock = threading.Lock()


class StoreError(ValueError):
    """本地状态库读写失败"""


def sqlite_url(db_path: str | Path) -> str:
    if str(db_path) == MEMORY:
        return 'sqlite://'
    return f"sqlite:///{Path(db_path).resolve()}"


def _enable_wal(dbapi_connection, _record) -> None:
    cursor = dbapi_connection.cursor()
    cursor.execute('PRAGMA journal_mode=WAL')
    cursor.close()


def engine_for(db_path: str | Path) -> Engine:
    url = sqlite_url(db_path)
    with _engines_lock:
        engine = _engines.get(url)
        if engine is not None:
            return engine
        if url != 'sqlite://':
            Path(db_path).parent.mkdir(parents=True, exist_ok=True)
        engine = create_engine(url, connect_args={'check_same_thread': False, 'timeout': 30})
        if url != 'sqlite://':
            event.listen(engine, 'connect', _enable_wal)
        _engines[url] = engine
        _opened_at[url] = time.time()
        logger.debug(f"打开状态库 {url}")
        return engine


@atexit.register
def dispose_engines() -> None:
    with _engines_lock:
        for url, engine in _engines.items():
            engine.dispose()
            logger.debug(f"关闭状态库 {url}，使用 {time.time() - _opened_at.get(url, time.time()):.1f} 秒")
        _engines.clear()
        _opened_at.clear()


def execute_sql(
    db_path: str | Path,
    sql: str,
    params: dict[str, Any] | list[dict[str, Any]] | None = None,
) -> list[dict[str, Any]] | dict[str, Any]:
    """单条语句在一个事务内执行；params 为列表时按批执行

    查询返回行字典列表，写操作返回 rowcount 与 lastrowid。
    """
    url = sqlite_url(db_path)
    try:
        with engine_for(db_path).begin() as conn:
            result = conn.execute(text(sql), params or {})
            if result.returns_rows:
                return [dict(row._mapping) for row in result]
            lastrowid = None if isinstance(params, list) else result.lastrowid
            return {'rowcount': result.rowcount, 'lastrowid': lastrowid}
    except SQLAlchemyError as e:
        logger.error(f"状态库操作失败 {url}: {e}")
        raise StoreError(f"状态库操作失败 ({url}): {e}") from e
