"""
Database Module - Run registry SQLite/PostgreSQL dengan SQLAlchemy
"""

from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional
import logging

from sqlalchemy import create_engine, Column, Integer, String, DateTime, Text, ForeignKey
from sqlalchemy.orm import declarative_base, sessionmaker, relationship
from sqlalchemy.pool import StaticPool, NullPool

from app.config import DATABASE_URL

logger = logging.getLogger(__name__)

Base = declarative_base()

# Global variables untuk lazy initialization
_engine = None
_SessionLocal = None
_database_url = None


def _utcnow():
    return datetime.now(timezone.utc)


def get_database_url() -> str:
    """Database URL aktif (configure_database > LAB_DATABASE_URL > SQLite lokal)"""
    url = _database_url or DATABASE_URL
    if url.startswith("sqlite:///") and url != "sqlite:///:memory:":
        Path(url[len("sqlite:///"):]).parent.mkdir(parents=True, exist_ok=True)
    return url


def configure_database(url: Optional[str] = None):
    """Ganti database URL dan reset engine (dipakai CLI dan test)"""
    global _engine, _SessionLocal, _database_url
    if _engine is not None:
        _engine.dispose()
    _engine = None
    _SessionLocal = None
    _database_url = url


def get_engine():
    """Get atau create database engine (lazy initialization)"""
    global _engine

    if _engine is None:
        database_url = get_database_url()

        if database_url.startswith("sqlite"):
            # SQLite - registry lokal, dipakai dari worker thread
            _engine = create_engine(
                database_url,
                echo=False,
                connect_args={"check_same_thread": False},
                poolclass=StaticPool,
            )
        else:
            _engine = create_engine(database_url, echo=False, pool_pre_ping=True, poolclass=NullPool)

    return _engine


def get_session_local():
    """Get SessionLocal class"""
    global _SessionLocal

    if _SessionLocal is None:
        _SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=get_engine(),
                                     expire_on_commit=False)

    return _SessionLocal


class ExperimentRun(Base):
    """Satu eksekusi `lab run`"""
    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True, index=True)
    name = Column(String(255), nullable=False)
    config_hash = Column(String(64), index=True, nullable=False)
    seed = Column(String(32))
    repetitions = Column(Integer)
    status = Column(String(20), default="running")  # running, completed, partial, failed
    report_path = Column(String(500))
    started_at = Column(DateTime, default=_utcnow)
    finished_at = Column(DateTime)

    repetition_records = relationship("RepetitionRecord", back_populates="run",
                                      cascade="all, delete-orphan")

    def __repr__(self):
        return f"<ExperimentRun(name='{self.name}', status='{self.status}')>"


class RepetitionRecord(Base):
    """Status satu repetisi dalam sebuah run"""
    __tablename__ = "repetition_records"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("experiment_runs.id"), nullable=False)
    index = Column(Integer, nullable=False)
    seed = Column(String(32))  # 64-bit unsigned, tidak muat di INTEGER
    status = Column(String(20), nullable=False)  # ok, failed
    error = Column(Text)

    run = relationship("ExperimentRun", back_populates="repetition_records")

    def __repr__(self):
        return f"<RepetitionRecord(run_id={self.run_id}, index={self.index}, status='{self.status}')>"


def init_db():
    """Inisialisasi database - buat semua tabel"""
    engine = get_engine()
    Base.metadata.create_all(bind=engine)
    logger.info(f"Run registry ready at {get_database_url()}")


@contextmanager
def session_scope():
    """Session dengan commit/rollback otomatis"""
    session = get_session_local()()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def register_run(name: str, config_hash: str, seed: int, repetitions: int) -> int:
    """Buat ExperimentRun baru, return id"""
    init_db()
    with session_scope() as session:
        run = ExperimentRun(name=name, config_hash=config_hash, seed=str(seed), repetitions=repetitions)
        session.add(run)
        session.flush()
        return run.id


def finish_run(run_id: int, records: List[dict], status: str, report_path: Optional[str] = None):
    """
    Simpan hasil repetisi dan tutup run

    Args:
        run_id: ExperimentRun.id
        records: dict dengan key index, seed, status, error
        status: completed | partial | failed
        report_path: Lokasi report.json
    """
    with session_scope() as session:
        run = session.get(ExperimentRun, run_id)
        for record in records:
            run.repetition_records.append(RepetitionRecord(
                index=record["index"],
                seed=str(record["seed"]),
                status=record["status"],
                error=record.get("error"),
            ))
        run.status = status
        run.report_path = report_path
        run.finished_at = _utcnow()


def list_runs(limit: int = 20) -> List[ExperimentRun]:
    """Run terbaru lebih dulu"""
    init_db()
    with session_scope() as session:
        return session.query(ExperimentRun).order_by(ExperimentRun.id.desc()).limit(limit).all()


if __name__ == "__main__":
    init_db()
