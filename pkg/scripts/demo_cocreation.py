#!/usr/bin/env python3
"""Walk the full co-creation loop against the deterministic mock provider.

Builds a scanner-helper agent, grounds it in a small document set, asks a
question, corrects the answer, teaches the correction back, and shows that
the curated answer now wins retrieval. Writes the project file so the result
can be reopened with `coforge --project demo_library.json serve`.

Usage:
    python3 scripts/demo_cocreation.py [--project demo_library.json]
"""
import argparse
import json

from coforge import Engine, MockProvider

DOCS = [
    ("Scanning", "Place the book face down on the glass.\n\nPress the green button to scan."),
    ("Returns", "Returned books go in the slot by the front door."),
    ("Holds", "Holds wait on the pickup shelf for seven days."),
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--project", default="demo_library.json")
    args = parser.parse_args()

    engine = Engine(provider=MockProvider(["Holds wait about a week, I think."]))
    engine.project_path = args.project

    agent = engine.create_agent(
        name="Scanner helper",
        definition="You help library patrons use the self-service scanner.",
        cooklist={"role": "self-service desk", "escalation": "refer to front desk staff"},
        exemplars=[("Where do returns go?", "In the slot by the front door.")],
    )
    kb = engine.create_kb("Scanner docs")
    for title, text in DOCS:
        doc_id, count = engine.ingest_document(kb.id, title, text)
        print(f"ingested {title!r}: {count} chunk(s)")
    engine.update_agent(agent.id, kb_id=kb.id)

    session, question, answer = engine.ask(agent.id, "How long do holds wait?")
    print(f"\ncreator: {question.content}")
    print(f"agent:   {answer.content}")
    for loc in answer.attributions:
        source = engine.get_kb(kb.id).docs[loc.doc_id]
        print(f"  source: {loc.doc_title} chars [{loc.start_char}, {loc.end_char})"
              f" -> {source.text[loc.start_char:loc.end_char]!r}")

    corrected = "Holds wait on the pickup shelf for seven days."
    engine.edit_message(answer.message_id, corrected, note="made it precise")
    chunk, exchange = engine.sync_message(kb.id, answer.message_id)
    print(f"\ntaught back: {exchange.question!r} -> {exchange.corrected_answer!r}")

    top = engine.search_kb(kb.id, "How long do holds wait?", k=1)[0]
    print(f"top hit is now {top.chunk.provenance} (score {top.effective_score:.2f})")

    findings = engine.audit_session(session.id)
    print(f"\naudit findings: {json.dumps([f.check_id for f in findings])}")

    path = engine.save()
    print(f"project saved to {path}")


if __name__ == "__main__":
    main()
