import os

# must precede any import of database
os.environ["DATABASE_URL"] = "sqlite://"
os.environ["HARNACK_RECORD"] = "0"
os.environ.setdefault("LOG_LEVEL", "WARNING")

import pytest

from database import Base, engine, init_db


@pytest.fixture
def db():
    init_db()
    yield
    Base.metadata.drop_all(bind=engine)
