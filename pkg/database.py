from sqlalchemy import create_engine, Column, Integer, String, ForeignKey, DateTime, Text, Boolean, Float
from sqlalchemy.orm import sessionmaker, relationship, declarative_base
from dotenv import load_dotenv
import datetime
import os

load_dotenv()

DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///harnack_workbench.db")

engine = create_engine(DATABASE_URL)
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)
Base = declarative_base()


def utcnow():
    return datetime.datetime.now(datetime.timezone.utc)


class VerificationRun(Base):
    __tablename__ = "verification_runs"

    id = Column(Integer, primary_key=True, index=True)
    command = Column(String, index=True)
    seed = Column(Integer)
    provider = Column(String, nullable=True)
    config = Column(Text)  # JSON echo of the RunConfig
    total = Column(Integer, default=0)
    passed = Column(Integer, default=0)
    exit_code = Column(Integer)
    created_at = Column(DateTime, default=utcnow)

    checks = relationship("CheckResult", back_populates="run", cascade="all, delete-orphan")
    audit_logs = relationship("AuditLog", back_populates="run")


class CheckResult(Base):
    __tablename__ = "check_results"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("verification_runs.id"))
    name = Column(String, index=True)
    value = Column(Float)
    tolerance = Column(Float)
    kind = Column(String)  # residual | nonnegative
    anchor = Column(String)
    passed = Column(Boolean, default=False)

    run = relationship("VerificationRun", back_populates="checks")


class AuditLog(Base):
    __tablename__ = "audit_logs"

    id = Column(Integer, primary_key=True, index=True)
    timestamp = Column(DateTime, default=utcnow)
    action = Column(String)
    details = Column(String)
    run_id = Column(Integer, ForeignKey("verification_runs.id"), nullable=True)  # null for events outside a run

    run = relationship("VerificationRun", back_populates="audit_logs")


def init_db():
    """Initializes the database and creates the tables."""
    Base.metadata.create_all(bind=engine)


if __name__ == "__main__":
    init_db()
