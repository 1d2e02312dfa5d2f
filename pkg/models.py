"""SQLAlchemy models for the experiment ledger."""

import os
from datetime import datetime, timezone

from sqlalchemy import DateTime, Float, Integer, String, Text, create_engine, select
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, sessionmaker

DEFAULT_DATABASE_URL = "sqlite:///poscommit.db"


class Base(DeclarativeBase):
    pass


class Run(Base):
    """One recorded attack or acceptance run."""

    __tablename__ = 'runs'

    id: Mapped[int] = mapped_column(
        Integer,
        primary_key=True,
    )

    command: Mapped[str] = mapped_column(
        String(32),
        nullable=False,
    )

    name: Mapped[str] = mapped_column(
        String(64),
        nullable=False,
    )

    seed: Mapped[int] = mapped_column(
        Integer,
        nullable=False,
    )

    trials: Mapped[int] = mapped_column(
        Integer,
        nullable=False,
        default=0,
    )

    successes: Mapped[int] = mapped_column(
        Integer,
        nullable=False,
        default=0,
    )

    rate: Mapped[float] = mapped_column(
        Float,
        nullable=True,
    )

    ci_low: Mapped[float] = mapped_column(
        Float,
        nullable=True,
    )

    ci_high: Mapped[float] = mapped_column(
        Float,
        nullable=True,
    )

    verdict: Mapped[str] = mapped_column(
        Text,
        nullable=True,
    )

    created_at: Mapped[datetime] = mapped_column(
        DateTime,
        nullable=False,
        default=lambda: datetime.now(timezone.utc).replace(tzinfo=None),
    )

    def __repr__(self):
        return f"<Run #{self.id}: {self.command} {self.name} {self.successes}/{self.trials}>"

    def to_dict(self):
        return {
            "id": self.id,
            "command": self.command,
            "name": self.name,
            "seed": self.seed,
            "trials": self.trials,
            "successes": self.successes,
            "rate": self.rate,
            "ci95": [self.ci_low, self.ci_high],
            "verdict": self.verdict,
            "created_at": self.created_at.isoformat(timespec="seconds"),
        }

    @classmethod
    def record(cls, session, command, report, seed, verdict=None):
        """Add a row for a report dict ({name, trials, successes, rate, ci95}).

        The caller commits.
        """

        low, high = report.get("ci95", (None, None))
        run = cls(
            command=command,
            name=report["name"],
            seed=seed,
            trials=report.get("trials", 0),
            successes=report.get("successes", 0),
            rate=report.get("rate"),
            ci_low=low,
            ci_high=high,
            verdict=verdict,
        )
        session.add(run)
        return run

    @classmethod
    def history(cls, session, name=None, limit=50):
        """Most recent runs first, optionally only those called `name`."""

        query = select(cls).order_by(cls.created_at.desc(), cls.id.desc()).limit(limit)
        if name is not None:
            query = query.where(cls.name == name)
        return list(session.scalars(query))


def connect_db(url=None):
    """Session factory for the ledger at `url` (or DATABASE_URL), creating tables."""

    url = url or os.environ.get('DATABASE_URL', DEFAULT_DATABASE_URL)
    engine = create_engine(url)
    Base.metadata.create_all(engine)
    return sessionmaker(bind=engine, expire_on_commit=False)
