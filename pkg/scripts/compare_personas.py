#!/usr/bin/env python3
"""Run the bundled patron personas against a service agent and compare arms.

Each persona drives its own simulated conversation with the same service
agent; the report tallies transcript length per arm. With the default mock
provider the dialogue content is scripted echoes, so this is a harness
demo rather than a quality measurement. Point it at a real provider with
--base-url to compare persona strategies on live generations.

Usage:
    python3 scripts/compare_personas.py
    python3 scripts/compare_personas.py --turns 8 --base-url http://localhost:11434/v1 --model llama3
"""
import argparse
import os

from coforge import Engine, MockProvider, RemoteProvider
from coforge.personas import PERSONA_FIXTURES


def build_engine(args) -> Engine:
    if args.base_url:
        provider = RemoteProvider(
            base_url=args.base_url,
            model=args.model,
            embed_model=args.embed_model,
            api_key=os.environ.get("AGENT_COFORGE_API_KEY"),
        )
        return Engine(provider=provider)
    return Engine(provider=MockProvider())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--turns", type=int, default=6)
    parser.add_argument("--base-url", default=None)
    parser.add_argument("--model", default="gpt-3.5-turbo")
    parser.add_argument("--embed-model", default="text-embedding-ada-002")
    args = parser.parse_args()

    engine = build_engine(args)
    agent = engine.create_agent(
        name="Scanner helper",
        definition="You help library patrons use the self-service scanner.",
    )
    kb = engine.create_kb("Scanner docs")
    engine.ingest_document(
        kb.id,
        "Guide",
        "Place the book face down on the glass.\n\nPress the green button to scan.",
    )
    engine.update_agent(agent.id, kb_id=kb.id)

    arms = [None] + [engine.get_persona(p.name) for p in PERSONA_FIXTURES]
    report = engine.compare_strategies(agent.id, arms, turns=args.turns)

    width = max(len(arm.label) for arm in report.arms)
    print(f"{'arm':<{width}}  messages  total chars  mean chars")
    for arm in report.arms:
        print(
            f"{arm.label:<{width}}  {arm.message_count:>8}  {arm.total_chars:>11}  "
            f"{arm.mean_chars_per_message:>10.1f}"
        )
    longest = report.arms[report.longest_arm_index]
    print(f"\nlongest arm: {longest.label} "
          f"(delta vs shortest: {report.total_chars_delta} chars)")


if __name__ == "__main__":
    main()
