// DOM wiring: file view with double-click element probing, the history column,
// the side-by-side diff focused on the tracked block, and validation controls.

import { ApiError, FacadeClient } from "./api.js";
import { lineDiff, rowIndexForRightLine } from "./diff.js";
import { oracleFromConfirmed } from "./oracle.js";
import { diffRowElements, historyColumnElements } from "./render.js";
import type { Correction, SessionState, WireGraph } from "./types.js";
import {
  applyVerdict,
  buildViewModel,
  initialValidation,
  isComplete,
  spliceViewModel,
  validationFromSession,
  type GraphViewModel,
  type NodeRow,
  type ValidationState,
} from "./viewmodel.js";

interface AppState {
  repo: string;
  commit: string;
  filePath: string;
  selection: { line: number; elementType: string } | null;
  sessionId: string | null;
  graph: WireGraph | null;
  vm: GraphViewModel | null;
  validation: ValidationState | null;
}

const state: AppState = {
  repo: "",
  commit: "HEAD",
  filePath: "",
  selection: null,
  sessionId: null,
  graph: null,
  vm: null,
  validation: null,
};

const client = new FacadeClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function banner(message: string, kind: "error" | "info" = "error"): void {
  const box = el<HTMLDivElement>("banner");
  box.textContent = message;
  box.className = `banner ${kind}`;
  box.hidden = message === "";
}

// -- file panel -----------------------------------------------------------------

async function loadFile(): Promise<void> {
  state.repo = el<HTMLInputElement>("repo-input").value.trim();
  state.commit = el<HTMLInputElement>("commit-input").value.trim() || "HEAD";
  state.filePath = el<HTMLInputElement>("file-input").value.trim();
  banner("");
  try {
    const content = await client.fileContent(state.repo, state.commit, state.filePath);
    renderFile(content);
  } catch (error) {
    banner(error instanceof ApiError ? `${error.status}: ${error.message}` : String(error));
  }
}

function renderFile(content: string): void {
  const panel = el<HTMLDivElement>("file-panel");
  panel.replaceChildren();
  content.split("\n").forEach((text, index) => {
    const row = document.createElement("div");
    row.className = "code-line";
    row.dataset.line = String(index + 1);
    const num = document.createElement("span");
    num.className = "line-num";
    num.textContent = String(index + 1);
    const code = document.createElement("span");
    code.className = "line-text";
    code.textContent = text;
    row.append(num, code);
    row.addEventListener("dblclick", () => void probeSelection(index + 1));
    panel.append(row);
  });
  setTrackEnabled(false, "double-click a block keyword to select it");
}

async function probeSelection(line: number): Promise<void> {
  const selection = window.getSelection()?.toString().trim() ?? "";
  try {
    const elementType = await client.elementType(state.repo, state.commit, state.filePath, line, selection);
    if (elementType === "invalid") {
      state.selection = null;
      setTrackEnabled(false, `nothing trackable selected on line ${line}`);
    } else {
      state.selection = { line, elementType };
      setTrackEnabled(true, `selected ${elementType} at line ${line}`);
    }
  } catch (error) {
    state.selection = null;
    setTrackEnabled(false, error instanceof ApiError ? error.message : String(error));
  }
}

function setTrackEnabled(enabled: boolean, hint: string): void {
  const button = el<HTMLButtonElement>("track-button");
  button.disabled = !enabled;
  el<HTMLSpanElement>("selection-hint").textContent = hint;
}

// -- tracking & history column ----------------------------------------------------

async function runTrack(): Promise<void> {
  if (!state.selection) return;
  banner("");
  try {
    const result = await client.track({
      repoPath: state.repo,
      commit: state.commit,
      filePath: state.filePath,
      blockType: state.selection.elementType,
      line: state.selection.line,
    });
    state.graph = result.graph;
    state.sessionId = result.sessionId;
    state.vm = buildViewModel(result.graph);
    state.validation = initialValidation(state.vm);
    renderHistoryColumn();
  } catch (error) {
    banner(error instanceof ApiError ? `${error.status}: ${error.message}` : String(error));
  }
}

/** Rebuild UI state from the session endpoint (page reload entry point). */
export async function restoreSession(sessionId: string): Promise<void> {
  const session: SessionState = await client.session(sessionId);
  state.sessionId = sessionId;
  state.graph = session.graph;
  state.vm = buildViewModel(session.graph);
  state.validation = validationFromSession(state.vm, session.decisions);
  renderHistoryColumn();
}

function renderHistoryColumn(): void {
  const column = el<HTMLDivElement>("history-column");
  column.replaceChildren();
  if (!state.vm || !state.validation) return;
  const elements = historyColumnElements(state.vm, state.validation, {
    onOpen: (row) => void openDiff(row),
    onConfirm: (row) => void submitDecision(row, "confirm"),
    onReject: (row) => void submitDecision(row, "reject"),
  });
  column.append(...elements);
  el<HTMLSpanElement>("session-status").textContent = isComplete(state.validation)
    ? "validation complete"
    : "validation in progress";
}

// -- diff view --------------------------------------------------------------------

async function openDiff(row: NodeRow): Promise<void> {
  try {
    const after = await client.fileContent(state.repo, row.commitId, row.file);
    let before = "";
    try {
      before = await client.fileContent(state.repo, `${row.commitId}~1`, row.file);
    } catch {
      before = ""; // introduction commit: everything shows as added
    }
    const rows = lineDiff(before, after);
    const panel = el<HTMLDivElement>("diff-panel");
    panel.replaceChildren();
    panel.append(...diffRowElements(rows));
    const focus = rowIndexForRightLine(rows, row.startLine);
    panel.querySelector(`[data-row="${focus}"]`)?.scrollIntoView({ block: "center" });
  } catch (error) {
    banner(error instanceof ApiError ? `${error.status}: ${error.message}` : String(error));
  }
}

// -- validation -------------------------------------------------------------------

async function submitDecision(row: NodeRow, verdict: "confirm" | "reject"): Promise<void> {
  if (!state.sessionId || !state.vm || !state.validation) return;
  let correction: Correction | undefined;
  if (verdict === "reject") {
    correction = readCorrectionForm();
  }
  try {
    const result = await client.decide(state.sessionId, row.commitId, verdict, correction);
    if (verdict === "confirm") {
      state.validation = applyVerdict(state.validation, row.id, "confirmed");
    } else if (result.resumedFrom) {
      const session = await client.session(state.sessionId);
      const spliced = spliceViewModel(state.vm, row.id, session.graph);
      state.graph = session.graph;
      state.vm = spliced.vm;
      state.validation = validationFromSession(state.vm, session.decisions);
      banner(`history resumed from ${result.resumedFrom.slice(0, 8)}`, "info");
    } else {
      state.validation = applyVerdict(state.validation, row.id, "rejected-unresolved");
    }
    renderHistoryColumn();
  } catch (error) {
    banner(error instanceof ApiError ? `${error.status}: ${error.message}` : String(error));
  }
}

function readCorrectionForm(): Correction | undefined {
  const file = el<HTMLInputElement>("correction-file").value.trim();
  const kind = el<HTMLInputElement>("correction-type").value.trim();
  const line = Number(el<HTMLInputElement>("correction-line").value);
  if (!file || !kind || !Number.isFinite(line) || line <= 0) return undefined;
  return { filePath: file, blockType: kind, line };
}

async function exportOracle(): Promise<void> {
  if (!state.sessionId || !state.graph || !state.validation) return;
  try {
    const oracle = await client.sessionOracle(state.sessionId);
    download("oracle.json", JSON.stringify(oracle, null, 2));
  } catch {
    // offline fallback: assemble from the confirmed nodes locally
    const oracle = oracleFromConfirmed(state.graph, state.validation, state.repo);
    download("oracle.json", JSON.stringify(oracle, null, 2));
  }
}

function download(name: string, content: string): void {
  const blob = new Blob([content], { type: "application/json" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = name;
  link.click();
  URL.revokeObjectURL(link.href);
}

// -- bootstrap ----------------------------------------------------------------------

export function bootstrap(): void {
  el<HTMLButtonElement>("load-button").addEventListener("click", () => void loadFile());
  el<HTMLButtonElement>("track-button").addEventListener("click", () => void runTrack());
  el<HTMLButtonElement>("export-button").addEventListener("click", () => void exportOracle());
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  if (sessionId) void restoreSession(sessionId);
}

if (typeof document !== "undefined" && document.getElementById("load-button")) {
  bootstrap();
}
