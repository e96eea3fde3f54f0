import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from coforge.engine import Engine
from coforge.providers import MockProvider


@pytest.fixture
def provider():
    return MockProvider()


@pytest.fixture
def engine():
    return Engine()


@pytest.fixture
def grounded_engine():
    """Engine with one service agent attached to a two-doc knowledge base."""
    eng = Engine()
    agent = eng.create_agent(
        name="Scanner helper",
        definition="You help library patrons use the book scanner.",
        kind="service_agent",
    )
    kb = eng.create_kb("Scanner docs")
    eng.ingest_document(
        kb.id,
        "Scanner guide",
        "Place the book face down on the glass plate.\n\n"
        "Press the green button to start a scan.",
    )
    eng.ingest_document(
        kb.id,
        "Hours",
        "The scanner room is open from nine to five on weekdays.",
    )
    eng.update_agent(agent.id, kb_id=kb.id)
    return eng, agent, kb
