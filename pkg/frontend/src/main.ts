// Browser entry point. Builds the whole page under #app and wires the
// panels to the HTTP client. All numbers, rankings, findings and step
// text shown here come straight from server payloads; the client only
// decides layout.

import { ApiError, CoforgeClient } from "./api.js";
import {
  FACET_HINTS,
  FACET_KEYS,
  FACET_LABELS,
  buildCooklist,
  canSubmit,
  formProblems,
  type AgentForm,
} from "./facets.js";
import { armBars } from "./metrics.js";
import { startPolling, type Poller } from "./poll.js";
import { locatorLabel, sourceRows } from "./sources.js";
import {
  beginEdit,
  cancelEdit,
  editSaved,
  enabledRulesFor,
  initialState,
  removeAgent,
  selectAgent,
  setActiveSession,
  setAgents,
  setCompareAgent,
  setCompareArms,
  setCompareTurns,
  setEditDraft,
  upsertAgent,
  type ViewState,
} from "./state.js";
import type {
  Agent,
  ChatMessage,
  CompareReport,
  Persona,
  RuleInfo,
  Session,
  SessionSummary,
} from "./types.js";

type ConfirmFn = (message: string) => boolean;

type TabName = "chat" | "knowledge" | "rules" | "simulate" | "compare" | "audit";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") {
      node.className = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

export class CoforgeApp {
  private readonly client: CoforgeClient;
  private readonly confirmFn: ConfirmFn;
  private readonly root: HTMLElement;

  private state: ViewState = initialState();
  private tab: TabName = "chat";
  private rules: RuleInfo[] = [];
  private personas: Persona[] = [];
  private showBuilder = false;

  // per-agent chat sessions, plus message ids taught to the knowledge base
  private chatSessions = new Map<string, string>();
  private curatedMessages = new Set<string>();

  // simulation view
  private simSessions = new Map<string, string>();
  private simPoller: Poller | null = null;
  private lastCompare: CompareReport | null = null;

  private sidebar!: HTMLElement;
  private content!: HTMLElement;
  private flash!: HTMLElement;

  constructor(root: HTMLElement, client?: CoforgeClient, confirmFn?: ConfirmFn) {
    this.root = root;
    this.client = client ?? new CoforgeClient("");
    this.confirmFn = confirmFn ?? ((message) => window.confirm(message));
  }

  async start(): Promise<void> {
    this.buildShell();
    await this.refreshFromServer();
  }

  /** The server wins: refetch everything the sidebar and panels depend on. */
  async refreshFromServer(): Promise<void> {
    try {
      const [agents, rules, personas] = await Promise.all([
        this.client.listAgents(),
        this.client.listRules(),
        this.client.listPersonas(),
      ]);
      this.state = setAgents(this.state, agents);
      if (
        this.state.selectedAgentId !== null &&
        !agents.some((a) => a.id === this.state.selectedAgentId)
      ) {
        this.state = selectAgent(this.state, null);
      }
      this.rules = rules;
      this.personas = personas;
      this.renderSidebar();
      this.renderContent();
    } catch (err) {
      this.showError(err);
    }
  }

  private buildShell(): void {
    clear(this.root);
    this.sidebar = el("aside", { class: "sidebar" });
    this.flash = el("div", { class: "flash hidden" });
    this.content = el("main", { class: "content" });
    const page = el("div", { class: "page" }, this.sidebar, el(
      "div",
      { class: "main-col" },
      this.flash,
      this.content,
    ));
    this.root.append(page);
  }

  private showError(err: unknown): void {
    this.flash.classList.remove("hidden");
    this.flash.classList.add("error");
    clear(this.flash);
    if (err instanceof ApiError) {
      this.flash.append(
        el("strong", {}, err.code),
        ` ${err.message}`,
      );
    } else {
      this.flash.append(String(err));
    }
  }

  private showNote(text: string): void {
    this.flash.classList.remove("hidden", "error");
    clear(this.flash);
    this.flash.append(text);
  }

  private clearFlash(): void {
    this.flash.classList.add("hidden");
    this.flash.classList.remove("error");
    clear(this.flash);
  }

  private selectedAgent(): Agent | null {
    return this.state.agents.find((a) => a.id === this.state.selectedAgentId) ?? null;
  }

  // ----- sidebar --------------------------------------------------------

  private renderSidebar(): void {
    clear(this.sidebar);
    this.sidebar.append(el("h1", {}, "coforge"));

    const newButton = el("button", { class: "primary wide" }, "+ New agent");
    newButton.addEventListener("click", () => {
      this.showBuilder = true;
      this.state = selectAgent(this.state, null);
      this.renderSidebar();
      this.renderContent();
    });
    this.sidebar.append(newButton);

    const refresh = el("button", { class: "wide" }, "Refresh");
    refresh.addEventListener("click", () => void this.refreshFromServer());
    this.sidebar.append(refresh);

    const list = el("ul", { class: "agent-list" });
    for (const agent of this.state.agents) {
      const item = el(
        "li",
        { class: agent.id === this.state.selectedAgentId ? "agent selected" : "agent" },
        el("span", { class: "agent-name" }, agent.name),
        el("span", { class: "agent-kind" }, agent.kind),
      );
      item.addEventListener("click", () => {
        this.showBuilder = false;
        this.state = selectAgent(this.state, agent.id);
        this.clearFlash();
        this.renderSidebar();
        this.renderContent();
      });
      list.append(item);
    }
    if (this.state.agents.length === 0) {
      list.append(el("li", { class: "empty" }, "No agents yet."));
    }
    this.sidebar.append(list);
  }

  // ----- content dispatch ------------------------------------------------

  private renderContent(): void {
    clear(this.content);
    if (this.showBuilder || this.state.agents.length === 0) {
      this.content.append(this.builderPanel());
      return;
    }
    const agent = this.selectedAgent();
    if (agent === null) {
      this.content.append(el("p", { class: "empty" }, "Pick an agent from the sidebar."));
      return;
    }
    this.content.append(this.tabBar(), this.panelFor(agent));
  }

  private tabBar(): HTMLElement {
    const bar = el("nav", { class: "tabs" });
    const tabs: [TabName, string][] = [
      ["chat", "Chat"],
      ["knowledge", "Knowledge"],
      ["rules", "Rules"],
      ["simulate", "Simulate"],
      ["compare", "Compare"],
      ["audit", "Audit"],
    ];
    for (const [name, label] of tabs) {
      const button = el("button", { class: name === this.tab ? "tab active" : "tab" }, label);
      button.addEventListener("click", () => {
        this.tab = name;
        this.renderContent();
      });
      bar.append(button);
    }
    return bar;
  }

  private panelFor(agent: Agent): HTMLElement {
    switch (this.tab) {
      case "chat":
        return this.chatPanel(agent);
      case "knowledge":
        return this.knowledgePanel(agent);
      case "rules":
        return this.rulesPanel(agent);
      case "simulate":
        return this.simulatePanel(agent);
      case "compare":
        return this.comparePanel(agent);
      case "audit":
        return this.auditPanel();
    }
  }

  // ----- agent builder ----------------------------------------------------

  private builderPanel(): HTMLElement {
    const panel = el("section", { class: "panel builder" });
    panel.append(el("h2", {}, "New agent"));

    const form: AgentForm = { name: "", definition: "", exemplars: [] };
    const facetInputs = new Map<string, HTMLInputElement>();

    const nameInput = el("input", { type: "text", placeholder: "Front desk helper" });
    const definitionInput = el("textarea", {
      rows: "4",
      placeholder: "You are a friendly helper at the library front desk...",
    });
    const exemplarBox = el("textarea", {
      rows: "3",
      placeholder: "One exemplar per line: question || answer",
    });

    const errorLine = el("p", { class: "form-error hidden" });
    const submit = el("button", { class: "primary" }, "Create agent") as HTMLButtonElement;
    submit.disabled = true;

    const readForm = (): AgentForm => {
      form.name = nameInput.value;
      form.definition = definitionInput.value;
      form.exemplars = exemplarBox.value
        .split("\n")
        .map((line) => line.trim())
        .filter((line) => line !== "")
        .map((line) => {
          const split = line.indexOf("||");
          if (split === -1) {
            return [line, ""] as [string, string];
          }
          return [line.slice(0, split).trim(), line.slice(split + 2).trim()] as [string, string];
        });
      return form;
    };

    const revalidate = () => {
      submit.disabled = !canSubmit(readForm());
    };
    for (const input of [nameInput, definitionInput, exemplarBox]) {
      input.addEventListener("input", revalidate);
    }

    panel.append(
      el("label", {}, "Name", nameInput),
      el("label", {}, "Definition", definitionInput),
      el("label", {}, "Exemplars", exemplarBox),
      el("h3", {}, "Design facets"),
      el("p", { class: "hint" }, "Optional: describe the service you are scoping. The form covers every facet the server accepts."),
    );

    const facetGrid = el("div", { class: "facet-grid" });
    for (const key of FACET_KEYS) {
      const input = el("input", { type: "text", placeholder: FACET_HINTS[key] });
      facetInputs.set(key, input);
      facetGrid.append(el("label", { class: "facet" }, FACET_LABELS[key], input));
    }
    panel.append(facetGrid, errorLine, submit);

    submit.addEventListener("click", async () => {
      const current = readForm();
      const problems = formProblems(current);
      if (problems.length > 0) {
        errorLine.textContent = problems.join("; ");
        errorLine.classList.remove("hidden");
        return;
      }
      const entries: Record<string, string> = {};
      for (const [key, input] of facetInputs) {
        entries[key] = input.value;
      }
      try {
        const agent = await this.client.createAgent({
          name: current.name.trim(),
          definition: current.definition.trim(),
          exemplars: current.exemplars,
          cooklist: buildCooklist(entries),
        });
        this.state = upsertAgent(this.state, agent);
        this.state = selectAgent(this.state, agent.id);
        this.showBuilder = false;
        this.clearFlash();
        this.renderSidebar();
        this.renderContent();
      } catch (err) {
        errorLine.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
        errorLine.classList.remove("hidden");
      }
    });

    return panel;
  }

  // ----- chat -------------------------------------------------------------

  private chatPanel(agent: Agent): HTMLElement {
    const panel = el("section", { class: "panel chat" });

    const header = el("div", { class: "panel-head" }, el("h2", {}, agent.name));
    const deleteButton = el("button", { class: "danger" }, "Delete agent");
    deleteButton.addEventListener("click", async () => {
      if (!this.confirmFn(`Delete agent "${agent.name}"? This cannot be undone.`)) {
        return;
      }
      try {
        await this.client.deleteAgent(agent.id);
        this.chatSessions.delete(agent.id);
        this.state = removeAgent(this.state, agent.id);
        this.renderSidebar();
        this.renderContent();
      } catch (err) {
        this.showError(err);
      }
    });
    header.append(deleteButton);
    panel.append(header);

    if (agent.kb_id === null) {
      panel.append(
        el("p", { class: "hint" }, "Attach a knowledge base (Knowledge tab) before asking questions."),
      );
    }

    const transcriptBox = el("div", { class: "transcript" });
    panel.append(transcriptBox);
    void this.renderChatTranscript(agent, transcriptBox);

    const input = el("input", { type: "text", placeholder: "Ask the agent something..." });
    const send = el("button", { class: "primary" }, "Send");
    const composer = el("div", { class: "composer" }, input, send);
    panel.append(composer);

    const submit = async () => {
      const content = input.value.trim();
      if (content === "") {
        return;
      }
      send.setAttribute("disabled", "disabled");
      try {
        let sessionId = this.chatSessions.get(agent.id) ?? null;
        if (sessionId === null) {
          const session = await this.client.createSession({
            participants: [agent.id],
            turn_policy: "manual",
          });
          sessionId = session.id;
          this.chatSessions.set(agent.id, sessionId);
          this.state = setActiveSession(this.state, sessionId);
        }
        await this.client.postTurn(sessionId, content);
        input.value = "";
        this.clearFlash();
        await this.renderChatTranscript(agent, transcriptBox);
      } catch (err) {
        this.showError(err);
      } finally {
        send.removeAttribute("disabled");
      }
    };
    send.addEventListener("click", () => void submit());
    input.addEventListener("keydown", (ev) => {
      if (ev.key === "Enter") {
        void submit();
      }
    });

    return panel;
  }

  private async renderChatTranscript(agent: Agent, box: HTMLElement): Promise<void> {
    clear(box);
    const sessionId = this.chatSessions.get(agent.id);
    if (sessionId === undefined) {
      box.append(el("p", { class: "empty" }, "No conversation yet."));
      return;
    }
    let session: Session;
    try {
      session = await this.client.getSession(sessionId);
    } catch (err) {
      this.showError(err);
      return;
    }
    for (const message of session.transcript) {
      box.append(this.messageRow(agent, session, message));
    }
    box.scrollTop = box.scrollHeight;
  }

  private authorName(authorId: string): string {
    if (authorId === "creator") {
      return "you";
    }
    const agent = this.state.agents.find((a) => a.id === authorId);
    return agent ? agent.name : authorId.slice(0, 8);
  }

  private messageRow(agent: Agent, session: Session, message: ChatMessage): HTMLElement {
    const mine = message.author_id === "creator";
    const row = el("div", { class: mine ? "message creator" : "message agent" });
    const head = el("div", { class: "message-head" }, el("strong", {}, this.authorName(message.author_id)));
    if (message.edited) {
      head.append(el("span", { class: "badge" }, "edited"));
    }
    if (this.curatedMessages.has(message.message_id)) {
      head.append(el("span", { class: "badge curated" }, "curated"));
    }
    row.append(head);

    const pending = this.state.pendingEdit;
    if (pending !== null && pending.messageId === message.message_id) {
      row.append(this.editControls(agent, message));
      return row;
    }

    row.append(el("p", { class: "message-body" }, message.content));

    if (message.attributions.length > 0) {
      row.append(this.sourcesBlock(agent, message));
    }

    if (!mine) {
      const actions = el("div", { class: "message-actions" });
      const edit = el("button", { class: "small" }, "Edit");
      edit.addEventListener("click", () => {
        this.state = beginEdit(this.state, message.message_id, message.content);
        this.renderContent();
      });
      actions.append(edit);
      if (agent.kb_id !== null) {
        const teach = el("button", { class: "small" }, "Teach this answer");
        teach.addEventListener("click", async () => {
          try {
            const synced = await this.client.syncMessage(agent.kb_id as string, message.message_id);
            this.curatedMessages.add(message.message_id);
            this.showNote(`Saved to the knowledge base as a ${synced.provenance} answer.`);
            this.renderContent();
          } catch (err) {
            this.showError(err);
          }
        });
        actions.append(teach);
      }
      row.append(actions);
    }
    return row;
  }

  private editControls(agent: Agent, message: ChatMessage): HTMLElement {
    const wrap = el("div", { class: "edit-box" });
    const area = el("textarea", { rows: "4" });
    area.value = this.state.pendingEdit?.draft ?? message.content;
    area.addEventListener("input", () => {
      this.state = setEditDraft(this.state, area.value);
    });

    const save = el("button", { class: "primary small" }, "Save");
    save.addEventListener("click", async () => {
      if (!this.confirmFn("Overwrite this reply with your edit?")) {
        return;
      }
      const draft = this.state.pendingEdit?.draft ?? area.value;
      try {
        const result = await this.client.editMessage(message.message_id, draft);
        this.state = editSaved(this.state, result.message);
        this.clearFlash();
        this.renderContent();
      } catch (err) {
        this.showError(err);
      }
    });

    const cancel = el("button", { class: "small" }, "Cancel");
    cancel.addEventListener("click", () => {
      this.state = cancelEdit(this.state);
      this.renderContent();
    });

    wrap.append(area, el("div", { class: "edit-actions" }, save, cancel));
    return wrap;
  }

  private sourcesBlock(agent: Agent, message: ChatMessage): HTMLElement {
    const details = el("details", { class: "sources" });
    details.append(el("summary", {}, `Sources (${message.attributions.length})`));
    const body = el("div", { class: "sources-body" }, "Loading...");
    details.append(body);

    details.addEventListener("toggle", async () => {
      if (!details.open || agent.kb_id === null) {
        return;
      }
      try {
        const chunks = await this.client.listChunks(agent.kb_id);
        clear(body);
        for (const rowData of sourceRows(message, chunks)) {
          const row = el("div", { class: "source-row" });
          const label = el("span", { class: "source-label" }, locatorLabel(rowData.locator));
          row.append(label);
          if (rowData.curated) {
            row.append(el("span", { class: "badge curated" }, "curated"));
          }
          if (rowData.resolved) {
            const span = el("blockquote", { class: "source-span hidden" }, rowData.span ?? "");
            label.addEventListener("click", () => span.classList.toggle("hidden"));
            label.classList.add("clickable");
            row.append(span);
          } else {
            row.append(el("span", { class: "badge warn" }, "missing"));
          }
          body.append(row);
        }
      } catch (err) {
        this.showError(err);
      }
    });
    return details;
  }

  // ----- knowledge ---------------------------------------------------------

  private knowledgePanel(agent: Agent): HTMLElement {
    const panel = el("section", { class: "panel knowledge" });
    panel.append(el("h2", {}, "Knowledge"));

    if (agent.kb_id === null) {
      const create = el("button", { class: "primary" }, "Create and attach a knowledge base");
      create.addEventListener("click", async () => {
        try {
          const kb = await this.client.createKb(`${agent.name} knowledge`);
          const updated = await this.client.updateAgent(agent.id, { kb_id: kb.id });
          this.state = upsertAgent(this.state, updated);
          this.renderContent();
        } catch (err) {
          this.showError(err);
        }
      });
      panel.append(el("p", { class: "hint" }, "This agent has no knowledge base yet."), create);
      return panel;
    }

    const kbId = agent.kb_id;

    // ingest form
    const title = el("input", { type: "text", placeholder: "Document title" });
    const text = el("textarea", { rows: "5", placeholder: "Paste the document text..." });
    const ingest = el("button", { class: "primary" }, "Add document");
    ingest.addEventListener("click", async () => {
      if (title.value.trim() === "" || text.value.trim() === "") {
        this.showError(new Error("both a title and some text are required"));
        return;
      }
      try {
        const added = await this.client.ingestDoc(kbId, title.value.trim(), text.value);
        this.showNote(`Ingested "${title.value.trim()}" as ${added.chunks_added} chunk(s).`);
        title.value = "";
        text.value = "";
        this.renderContent();
      } catch (err) {
        this.showError(err);
      }
    });
    panel.append(
      el("h3", {}, "Add a document"),
      el("label", {}, "Title", title),
      el("label", {}, "Text", text),
      ingest,
    );

    // search box
    const query = el("input", { type: "text", placeholder: "Search the knowledge base..." });
    const searchButton = el("button", {}, "Search");
    const resultsBox = el("div", { class: "search-results" });
    searchButton.addEventListener("click", async () => {
      if (query.value.trim() === "") {
        return;
      }
      try {
        const results = await this.client.search(kbId, query.value);
        clear(resultsBox);
        if (results.length === 0) {
          resultsBox.append(el("p", { class: "empty" }, "No matches."));
        }
        for (const result of results) {
          const row = el("div", { class: "source-row" });
          row.append(
            el("span", { class: "source-label" }, locatorLabel(result.locator)),
            el("span", { class: result.provenance === "curated" ? "badge curated" : "badge" }, result.provenance),
            el("code", { class: "score" }, `score ${String(result.effective_score)}`),
            el("blockquote", { class: "source-span" }, result.text),
          );
          resultsBox.append(row);
        }
      } catch (err) {
        this.showError(err);
      }
    });
    panel.append(el("h3", {}, "Search"), el("div", { class: "composer" }, query, searchButton), resultsBox);

    // chunk listing
    const chunkBox = el("div", { class: "chunk-list" });
    panel.append(el("h3", {}, "Chunks"), chunkBox);
    void (async () => {
      try {
        const chunks = await this.client.listChunks(kbId);
        if (chunks.length === 0) {
          chunkBox.append(el("p", { class: "empty" }, "Nothing ingested yet."));
          return;
        }
        for (const chunk of chunks) {
          chunkBox.append(
            el(
              "div",
              { class: "source-row" },
              el("span", { class: "source-label" }, locatorLabel(chunk.locator)),
              el("span", { class: chunk.provenance === "curated" ? "badge curated" : "badge" }, chunk.provenance),
              el("blockquote", { class: "source-span" }, chunk.text),
            ),
          );
        }
      } catch (err) {
        this.showError(err);
      }
    })();

    return panel;
  }

  // ----- rules --------------------------------------------------------------

  private rulesPanel(agent: Agent): HTMLElement {
    const panel = el("section", { class: "panel rules" });
    panel.append(el("h2", {}, "Reply rules"));
    const enabled = enabledRulesFor(this.state, agent.id);

    for (const rule of this.rules) {
      const checkbox = el("input", { type: "checkbox" });
      checkbox.checked = enabled.includes(rule.rule_id);
      checkbox.addEventListener("change", async () => {
        try {
          const updated = checkbox.checked
            ? await this.client.enableRule(agent.id, rule.rule_id)
            : await this.client.disableRule(agent.id, rule.rule_id);
          this.state = upsertAgent(this.state, updated);
          this.clearFlash();
          this.renderContent();
        } catch (err) {
          this.showError(err);
          this.renderContent();
        }
      });
      panel.append(
        el(
          "label",
          { class: "rule-row" },
          checkbox,
          el("span", {}, el("strong", {}, rule.display_name), el("p", { class: "hint" }, rule.description)),
        ),
      );
    }
    if (this.rules.length === 0) {
      panel.append(el("p", { class: "empty" }, "No rules available."));
    }
    return panel;
  }

  // ----- simulation -----------------------------------------------------------

  private simulatePanel(agent: Agent): HTMLElement {
    const panel = el("section", { class: "panel simulate" });
    panel.append(el("h2", {}, "Simulate a patron"));

    const personaSelect = el("select", {});
    for (const persona of this.personas) {
      const option = el("option", { value: persona.name }, `${persona.name} (${persona.strategy})`);
      personaSelect.append(option);
    }

    const turnsInput = el("input", { type: "number", value: "4", min: "1" });
    const run = el("button", { class: "primary" }, "Run");
    const stop = el("button", { class: "danger" }, "Stop");
    const statusBadge = el("span", { class: "badge" }, "idle");
    const transcriptBox = el("div", { class: "transcript" });

    panel.append(
      el("div", { class: "sim-controls" },
        el("label", {}, "Persona", personaSelect),
        el("label", {}, "Max turns", turnsInput),
        run,
        stop,
        statusBadge,
      ),
      transcriptBox,
      this.customPersonaForm(),
    );

    const renderSession = (session: Session) => {
      statusBadge.textContent = session.status;
      statusBadge.className = `badge status-${session.status}`;
      clear(transcriptBox);
      for (const message of session.transcript) {
        const row = el(
          "div",
          { class: message.author_id === agent.id ? "message agent" : "message creator" },
          el("div", { class: "message-head" }, el("strong", {}, this.authorName(message.author_id))),
          el("p", { class: "message-body" }, message.content),
        );
        transcriptBox.append(row);
      }
      transcriptBox.scrollTop = transcriptBox.scrollHeight;
    };

    run.addEventListener("click", async () => {
      const personaName = personaSelect.value;
      if (personaName === "") {
        this.showError(new Error("pick a persona first"));
        return;
      }
      try {
        const patron = await this.client.instantiatePersona(personaName);
        this.state = upsertAgent(this.state, patron);
        const session = await this.client.createSession({
          participants: [patron.id, agent.id],
          max_turns: Number(turnsInput.value) || 4,
        });
        this.simSessions.set(agent.id, session.id);
        await this.client.runSessionBackground(session.id);
        this.simPoller?.stop();
        this.simPoller = startPolling(
          async () => {
            const latest = await this.client.getSession(session.id);
            renderSession(latest);
            return latest.status === "open";
          },
          { onError: (err) => this.showError(err) },
        );
        this.renderSidebar();
      } catch (err) {
        this.showError(err);
      }
    });

    stop.addEventListener("click", async () => {
      const sessionId = this.simSessions.get(agent.id);
      if (sessionId === undefined) {
        return;
      }
      try {
        const session = await this.client.stopSession(sessionId);
        this.simPoller?.stop();
        renderSession(session);
      } catch (err) {
        this.showError(err);
      }
    });

    const existing = this.simSessions.get(agent.id);
    if (existing !== undefined) {
      void this.client
        .getSession(existing)
        .then(renderSession)
        .catch((err) => this.showError(err));
    }

    return panel;
  }

  private customPersonaForm(): HTMLElement {
    const wrap = el("details", { class: "custom-persona" });
    wrap.append(el("summary", {}, "Define a custom persona"));

    const name = el("input", { type: "text", placeholder: "Name" });
    const profile = el("textarea", { rows: "2", placeholder: "Who is this patron?" });
    const tendency = el("textarea", { rows: "2", placeholder: "How do they tend to behave?" });
    const strategy = el("select", {});
    for (const value of ["explicit", "chained", "descriptive"]) {
      strategy.append(el("option", { value }, value));
    }
    const create = el("button", { class: "primary small" }, "Save persona");
    create.addEventListener("click", async () => {
      if (name.value.trim() === "") {
        this.showError(new Error("the persona needs a name"));
        return;
      }
      try {
        await this.client.createPersona({
          name: name.value.trim(),
          profile: profile.value,
          tendency_clause: tendency.value,
          strategy: strategy.value,
        });
        this.personas = await this.client.listPersonas();
        this.showNote(`Persona "${name.value.trim()}" saved.`);
        this.renderContent();
      } catch (err) {
        this.showError(err);
      }
    });

    wrap.append(
      el("label", {}, "Name", name),
      el("label", {}, "Profile", profile),
      el("label", {}, "Tendency", tendency),
      el("label", {}, "Prompting strategy", strategy),
      create,
    );
    return wrap;
  }

  // ----- comparison -------------------------------------------------------------

  private comparePanel(agent: Agent): HTMLElement {
    this.state = setCompareAgent(this.state, agent.id);
    const panel = el("section", { class: "panel compare" });
    panel.append(el("h2", {}, "Compare prompting strategies"));

    const armsBox = el("div", { class: "arms" });
    const armSelects: HTMLSelectElement[] = [];

    const addArm = (initial: string | null) => {
      const select = el("select", {});
      select.append(el("option", { value: "" }, "baseline patron"));
      for (const persona of this.personas) {
        select.append(el("option", { value: persona.name }, persona.name));
      }
      select.value = initial ?? "";
      armSelects.push(select);
      armsBox.append(el("label", { class: "arm" }, `Arm ${armSelects.length}`, select));
    };
    for (const arm of this.state.compareSetup.armPersonas) {
      addArm(arm);
    }
    if (armSelects.length < 2 && this.personas.length > 0) {
      addArm(this.personas[0].name);
    }

    const addButton = el("button", { class: "small" }, "+ arm");
    addButton.addEventListener("click", () => addArm(null));

    const turnsInput = el("input", { type: "number", value: String(this.state.compareSetup.turns), min: "1" });
    const runButton = el("button", { class: "primary" }, "Run comparison");
    const resultBox = el("div", { class: "compare-results" });

    runButton.addEventListener("click", async () => {
      const armPersonas = armSelects.map((s) => (s.value === "" ? null : s.value));
      this.state = setCompareArms(this.state, armPersonas);
      this.state = setCompareTurns(this.state, Number(turnsInput.value) || 4);
      runButton.setAttribute("disabled", "disabled");
      runButton.textContent = "Running...";
      try {
        const report = await this.client.compare({
          service_agent_id: agent.id,
          arms: armPersonas.map((name) => ({ persona_name: name })),
          turns: this.state.compareSetup.turns,
        });
        this.lastCompare = report;
        this.renderCompareReport(resultBox, report);
      } catch (err) {
        this.showError(err);
      } finally {
        runButton.removeAttribute("disabled");
        runButton.textContent = "Run comparison";
      }
    });

    panel.append(
      armsBox,
      el("div", { class: "sim-controls" }, addButton, el("label", {}, "Turns per arm", turnsInput), runButton),
      resultBox,
    );
    if (this.lastCompare !== null) {
      this.renderCompareReport(resultBox, this.lastCompare);
    }
    return panel;
  }

  private renderCompareReport(box: HTMLElement, report: CompareReport): void {
    clear(box);
    for (const bar of armBars(report)) {
      const row = el("div", { class: "bar-row" });
      const fill = el("div", { class: bar.longest ? "bar longest" : "bar" });
      fill.style.width = `${bar.widthPct}%`;
      row.append(
        el("span", { class: "bar-label" }, bar.label),
        el("div", { class: "bar-track" }, fill),
        el(
          "span",
          { class: "bar-figures" },
          `${String(bar.totalChars)} chars over ${String(bar.messageCount)} messages (mean ${String(bar.meanChars)})`,
        ),
      );
      if (bar.longest) {
        row.append(el("span", { class: "badge" }, "longest"));
      }
      box.append(row);
    }
    box.append(el("p", { class: "hint" }, `Spread between arms: ${String(report.total_chars_delta)} chars.`));
  }

  // ----- audit ------------------------------------------------------------------

  private auditPanel(): HTMLElement {
    const panel = el("section", { class: "panel audit" });
    panel.append(el("h2", {}, "Audit a transcript"));

    const sessionSelect = el("select", {});
    const runButton = el("button", { class: "primary" }, "Run audit");
    const resultBox = el("div", { class: "audit-results" });

    void (async () => {
      try {
        const sessions = await this.client.listSessions();
        if (sessions.length === 0) {
          sessionSelect.append(el("option", { value: "" }, "no sessions yet"));
          return;
        }
        for (const session of sessions as SessionSummary[]) {
          sessionSelect.append(
            el(
              "option",
              { value: session.id },
              `${session.id.slice(0, 8)} (${session.message_count} messages, ${session.status})`,
            ),
          );
        }
      } catch (err) {
        this.showError(err);
      }
    })();

    runButton.addEventListener("click", async () => {
      if (sessionSelect.value === "") {
        return;
      }
      try {
        const { findings } = await this.client.audit(sessionSelect.value);
        clear(resultBox);
        if (findings.length === 0) {
          resultBox.append(el("p", { class: "empty" }, "No findings."));
          return;
        }
        for (const finding of findings) {
          resultBox.append(
            el(
              "div",
              { class: "finding" },
              el("span", { class: "badge warn" }, finding.check_id),
              el("span", { class: "hint" }, ` ${finding.severity} `),
              el("span", {}, finding.explanation),
            ),
          );
        }
      } catch (err) {
        this.showError(err);
      }
    });

    panel.append(el("div", { class: "sim-controls" }, sessionSelect, runButton), resultBox);

    const configBox = el("div", { class: "audit-configs" });
    panel.append(el("h3", {}, "Checks"), configBox);
    void (async () => {
      try {
        const configs = await this.client.auditConfigs();
        for (const config of configs) {
          configBox.append(
            el(
              "div",
              { class: "source-row" },
              el("code", {}, config.check_id),
              el("span", { class: "hint" }, config.enabled ? "enabled" : "disabled"),
            ),
          );
        }
      } catch (err) {
        this.showError(err);
      }
    })();

    return panel;
  }
}

const rootNode = typeof document !== "undefined" ? document.getElementById("app") : null;
if (rootNode !== null) {
  const app = new CoforgeApp(rootNode);
  void app.start();
}
