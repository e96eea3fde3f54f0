"""Command-line front door.

Every subcommand is a thin wrapper over the same :class:`Engine` methods
the HTTP API calls, loading the project file first and saving it after any
mutation. Output is JSON so commands compose in scripts.
"""
from __future__ import annotations

import json
import os
import sys
from typing import List, Optional, Tuple

import click

from .audit import render_summary
from .engine import Engine
from .errors import CoforgeError
from .personas import PersonaSpec
from .project import (
    agent_to_dict,
    load_project,
    message_to_dict,
    persona_to_dict,
    session_to_dict,
)
from .providers import MockProvider, RemoteProvider
from .api import finding_to_dict, report_to_dict, result_to_dict


def _echo(data) -> None:
    click.echo(json.dumps(data, indent=2, ensure_ascii=False))


class CliState:
    def __init__(
        self,
        project: Optional[str],
        provider_kind: str,
        base_url: str,
        model: str,
        embed_model: str,
        dimension: int,
        script: Tuple[str, ...],
    ):
        self.project = project
        self.provider_kind = provider_kind
        self.base_url = base_url
        self.model = model
        self.embed_model = embed_model
        self.dimension = dimension
        self.script = script
        self._engine: Optional[Engine] = None

    def build_provider(self):
        if self.provider_kind == "remote":
            return RemoteProvider(
                base_url=self.base_url,
                model=self.model,
                embed_model=self.embed_model,
                dimension=self.dimension,
            )
        return MockProvider(script=self.script)

    def engine(self) -> Engine:
        if self._engine is None:
            provider = self.build_provider()
            if self.project and os.path.exists(self.project):
                self._engine = load_project(self.project, provider=provider)
            else:
                self._engine = Engine(provider=provider)
                self._engine.project_path = self.project
        return self._engine

    def commit(self) -> None:
        if self._engine is not None and self.project:
            self._engine.save(self.project)


pass_state = click.make_pass_decorator(CliState)


@click.group()
@click.option("--project", type=click.Path(), default=None, help="Project file to load and save.")
@click.option(
    "--provider",
    "provider_kind",
    type=click.Choice(["mock", "remote"]),
    default="mock",
    show_default=True,
)
@click.option("--base-url", default="http://localhost:11434/v1", show_default=True)
@click.option("--model", default="gpt-3.5-turbo", show_default=True)
@click.option("--embed-model", default="text-embedding-ada-002", show_default=True)
@click.option("--dimension", default=1536, show_default=True, help="Remote embedding dimension.")
@click.option(
    "--script",
    multiple=True,
    help="Scripted mock reply (repeatable); consumed FIFO by chat calls.",
)
@click.pass_context
def main(ctx, project, provider_kind, base_url, model, embed_model, dimension, script):
    """Co-create, ground, correct, simulate, and audit LLM service agents."""
    ctx.obj = CliState(project, provider_kind, base_url, model, embed_model, dimension, script)


def run(state: CliState, fn):
    try:
        result = fn(state.engine())
        state.commit()
        return result
    except CoforgeError as exc:
        _echo(exc.as_dict())
        sys.exit(1)


# ----- serve ----------------------------------------------------------------


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8040, show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None)
@pass_state
def serve(state: CliState, host: str, port: int, ui_dir: Optional[str]):
    """Serve the HTTP API (and optionally the web UI)."""
    from .api import serve as api_serve

    api_serve(state.engine(), host=host, port=port, ui_dir=ui_dir)


# ----- agent ----------------------------------------------------------------


@main.group()
def agent():
    """Create, inspect, update, and delete agents."""


@agent.command("create")
@click.option("--name", required=True)
@click.option("--definition", required=True)
@click.option("--kind", default="service_agent", show_default=True)
@click.option("--kb", "kb_id", default=None)
@click.option(
    "--exemplar",
    "exemplars",
    multiple=True,
    help="Exemplar as 'user text||assistant text' (repeatable).",
)
@click.option("--facet", "facets", multiple=True, help="Cooklist entry as 'key=value'.")
@pass_state
def agent_create(state, name, definition, kind, kb_id, exemplars, facets):
    pairs = []
    for raw in exemplars:
        if "||" not in raw:
            raise click.BadParameter("exemplar must look like 'user||assistant'")
        user_text, assistant_text = raw.split("||", 1)
        pairs.append((user_text, assistant_text))
    cooklist = {}
    for raw in facets:
        if "=" not in raw:
            raise click.BadParameter("facet must look like 'key=value'")
        key, value = raw.split("=", 1)
        cooklist[key] = value
    result = run(
        state,
        lambda e: e.create_agent(
            name=name,
            definition=definition,
            kind=kind,
            kb_id=kb_id,
            exemplars=pairs,
            cooklist=cooklist,
        ),
    )
    _echo(agent_to_dict(result))


@agent.command("list")
@pass_state
def agent_list(state):
    _echo([agent_to_dict(a) for a in run(state, lambda e: e.list_agents())])


@agent.command("show")
@click.argument("agent_id")
@pass_state
def agent_show(state, agent_id):
    _echo(agent_to_dict(run(state, lambda e: e.get_agent(agent_id))))


@agent.command("update")
@click.argument("agent_id")
@click.option("--name", default=None)
@click.option("--definition", default=None)
@click.option("--kb", "kb_id", default=None)
@pass_state
def agent_update(state, agent_id, name, definition, kb_id):
    patch = {}
    if name is not None:
        patch["name"] = name
    if definition is not None:
        patch["definition"] = definition
    if kb_id is not None:
        patch["kb_id"] = kb_id
    _echo(agent_to_dict(run(state, lambda e: e.update_agent(agent_id, **patch))))


@agent.command("delete")
@click.argument("agent_id")
@pass_state
def agent_delete(state, agent_id):
    run(state, lambda e: e.delete_agent(agent_id))
    _echo({"deleted": agent_id})


@agent.command("enable-rule")
@click.argument("agent_id")
@click.argument("rule_id")
@pass_state
def agent_enable_rule(state, agent_id, rule_id):
    _echo(agent_to_dict(run(state, lambda e: e.enable_rule(agent_id, rule_id))))


@agent.command("disable-rule")
@click.argument("agent_id")
@click.argument("rule_id")
@pass_state
def agent_disable_rule(state, agent_id, rule_id):
    _echo(agent_to_dict(run(state, lambda e: e.disable_rule(agent_id, rule_id))))


@agent.command("rules")
@pass_state
def agent_rules(state):
    _echo(
        [
            {
                "rule_id": d.rule_id,
                "display_name": d.display_name,
                "description": d.description,
                "hooks": list(d.hooks),
            }
            for d in run(state, lambda e: e.list_rules())
        ]
    )


# ----- kb -------------------------------------------------------------------


@main.group()
def kb():
    """Knowledge bases: create, ingest, search, sync."""


@kb.command("create")
@click.option("--name", required=True)
@pass_state
def kb_create(state, name):
    result = run(state, lambda e: e.create_kb(name))
    _echo({"id": result.id, "name": result.name, "embedding_dimension": result.embedding_dimension})


@kb.command("ingest")
@click.argument("kb_id")
@click.option("--title", required=True)
@click.option("--file", "file_path", type=click.Path(exists=True), default=None)
@click.option("--text", default=None)
@pass_state
def kb_ingest(state, kb_id, title, file_path, text):
    if text is None and file_path is None:
        raise click.BadParameter("pass --text or --file")
    if text is None:
        with open(file_path, "r", encoding="utf-8") as handle:
            text = handle.read()
    doc_id, count = run(state, lambda e: e.ingest_document(kb_id, title, text))
    _echo({"doc_id": doc_id, "chunks_added": count})


@kb.command("chunks")
@click.argument("kb_id")
@pass_state
def kb_chunks(state, kb_id):
    result = run(state, lambda e: e.get_kb(kb_id))
    _echo(
        [
            {
                "id": c.id,
                "ordinal": c.ordinal,
                "text": c.text,
                "provenance": c.provenance,
                "priority_boost": c.priority_boost,
            }
            for c in result.chunks
        ]
    )


@kb.command("search")
@click.argument("kb_id")
@click.argument("query")
@click.option("-k", "k", default=None, type=int)
@pass_state
def kb_search(state, kb_id, query, k):
    results = run(state, lambda e: e.search_kb(kb_id, query, k))
    _echo([result_to_dict(r) for r in results])


@kb.command("sync")
@click.argument("kb_id")
@click.option("--message", "message_id", required=True)
@click.option("--boost", default=None, type=float)
@pass_state
def kb_sync(state, kb_id, message_id, boost):
    chunk, exchange = run(state, lambda e: e.sync_message(kb_id, message_id, boost=boost))
    _echo(
        {
            "chunk_id": chunk.id,
            "text": chunk.text,
            "provenance": chunk.provenance,
            "priority_boost": chunk.priority_boost,
            "question": exchange.question,
        }
    )


# ----- session ----------------------------------------------------------------


@main.group()
def session():
    """Chat sessions: ask, simulate, edit, export."""


@session.command("create")
@click.option("--participants", required=True, help="Comma-separated agent ids.")
@click.option("--policy", default="round_robin", show_default=True)
@click.option("--max-turns", default=10, show_default=True)
@pass_state
def session_create(state, participants, policy, max_turns):
    ids = [p.strip() for p in participants.split(",") if p.strip()]
    result = run(state, lambda e: e.create_session(ids, turn_policy=policy, max_turns=max_turns))
    _echo(session_to_dict(result))


@session.command("ask")
@click.argument("agent_id")
@click.argument("content")
@click.option("--session", "session_id", default=None, help="Reuse an existing manual session.")
@pass_state
def session_ask(state, agent_id, content, session_id):
    chat_session, creator_message, agent_message = run(
        state, lambda e: e.ask(agent_id, content, session_id=session_id)
    )
    _echo(
        {
            "session_id": chat_session.id,
            "creator_message": message_to_dict(creator_message),
            "message": message_to_dict(agent_message),
        }
    )


@session.command("next")
@click.argument("session_id")
@pass_state
def session_next(state, session_id):
    _echo(message_to_dict(run(state, lambda e: e.advance_session(session_id))))


@session.command("run")
@click.argument("session_id")
@pass_state
def session_run(state, session_id):
    _echo(session_to_dict(run(state, lambda e: e.run_session(session_id))))


@session.command("stop")
@click.argument("session_id")
@pass_state
def session_stop(state, session_id):
    _echo(session_to_dict(run(state, lambda e: e.stop_session(session_id))))


@session.command("show")
@click.argument("session_id")
@pass_state
def session_show(state, session_id):
    _echo(session_to_dict(run(state, lambda e: e.get_session(session_id))))


@session.command("edit")
@click.argument("message_id")
@click.argument("content")
@click.option("--note", default=None)
@pass_state
def session_edit(state, message_id, content, note):
    message, exchange = run(state, lambda e: e.edit_message(message_id, content, note=note))
    _echo({"message": message_to_dict(message), "question": exchange.question})


@session.command("export")
@click.argument("session_id")
@pass_state
def session_export(state, session_id):
    records = run(state, lambda e: e.export_transcript(session_id))
    for record in records:
        click.echo(json.dumps(record, ensure_ascii=False))


# ----- persona ----------------------------------------------------------------


@main.group()
def persona():
    """Personas: create, instantiate as agents, compare strategies."""


@persona.command("create")
@click.option("--name", required=True)
@click.option("--profile", default="")
@click.option("--clause", "tendency_clause", default="")
@click.option("--strategy", default="explicit", show_default=True)
@pass_state
def persona_create(state, name, profile, tendency_clause, strategy):
    result = run(
        state,
        lambda e: e.create_persona(
            name=name, profile=profile, tendency_clause=tendency_clause, strategy=strategy
        ),
    )
    _echo(persona_to_dict(result))


@persona.command("list")
@pass_state
def persona_list(state):
    _echo([persona_to_dict(p) for p in run(state, lambda e: e.list_personas())])


@persona.command("instantiate")
@click.argument("name")
@pass_state
def persona_instantiate(state, name):
    _echo(agent_to_dict(run(state, lambda e: e.instantiate_persona(name))))


@persona.command("compare")
@click.option("--service", "service_agent_id", required=True)
@click.option(
    "--arm",
    "arm_names",
    multiple=True,
    required=True,
    help="Persona name per arm; use 'baseline' for the bare patron arm.",
)
@click.option("--turns", default=10, show_default=True)
@pass_state
def persona_compare(state, service_agent_id, arm_names, turns):
    def build(e: Engine):
        arms: List[Optional[PersonaSpec]] = []
        for arm_name in arm_names:
            arms.append(None if arm_name == "baseline" else e.get_persona(arm_name))
        return e.compare_strategies(service_agent_id, arms, turns=turns)

    _echo(report_to_dict(run(state, build)))


# ----- audit ----------------------------------------------------------------


@main.group()
def audit():
    """Heuristic transcript audits."""


@audit.command("run")
@click.option("--session", "session_id", required=True)
@click.option("--summary/--no-summary", default=True, show_default=True)
@pass_state
def audit_run(state, session_id, summary):
    findings = run(state, lambda e: e.audit_session(session_id))
    _echo({"findings": [finding_to_dict(f) for f in findings]})
    if summary:
        click.echo(render_summary(findings), err=True)


# ----- project ----------------------------------------------------------------


@main.group()
def project():
    """Project file maintenance."""


@project.command("validate")
@pass_state
def project_validate(state):
    from .project import validate_integrity

    run(state, lambda e: validate_integrity(e))
    _echo({"valid": True, "project": state.project})


@project.command("info")
@pass_state
def project_info(state):
    def info(e: Engine):
        return {
            "project": state.project,
            "agents": len(e.list_agents()),
            "knowledge_bases": len(e.kbs.list()),
            "sessions": len(e.sessions.list()),
            "personas": len(e.personas),
        }

    _echo(run(state, info))


if __name__ == "__main__":
    main()
