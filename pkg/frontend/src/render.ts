// DOM factories for the history column and diff view. Pure functions of their
// inputs plus callbacks, so they render identically under tests and in the app.

import type { DiffRow } from "./diff.js";
import type { GraphViewModel, NodeRow, ValidationState } from "./viewmodel.js";

export interface NodeHandlers {
  onOpen: (row: NodeRow) => void;
  onConfirm: (row: NodeRow) => void;
  onReject: (row: NodeRow) => void;
}

export function nodeRowElement(row: NodeRow, verdict: string, handlers: NodeHandlers): HTMLElement {
  const item = document.createElement("div");
  item.className = `history-node verdict-${verdict} lane-${row.lane}`;
  item.dataset.nodeId = row.id;
  item.dataset.commit = row.commitId;
  item.title = row.tooltip;
  item.style.marginLeft = `${row.lane * 18}px`;

  const head = document.createElement("div");
  head.className = "node-head";
  head.textContent = `${row.shortId} · ${row.blockType} @ ${row.file}:${row.startLine}`;
  head.addEventListener("click", () => handlers.onOpen(row));

  const tags = document.createElement("div");
  tags.className = "node-tags";
  tags.textContent = row.changes.map((c) => c.type).join(", ") || "no block change";

  const controls = document.createElement("div");
  controls.className = "node-controls";
  const confirm = document.createElement("button");
  confirm.textContent = "confirm";
  confirm.addEventListener("click", () => handlers.onConfirm(row));
  const reject = document.createElement("button");
  reject.textContent = "reject";
  reject.addEventListener("click", () => handlers.onReject(row));
  controls.append(confirm, reject);

  item.append(head, tags, controls);
  return item;
}

export function historyColumnElements(
  vm: GraphViewModel,
  validation: ValidationState,
  handlers: NodeHandlers,
): HTMLElement[] {
  if (vm.empty) {
    const msg = document.createElement("p");
    msg.className = "empty-state";
    msg.textContent = "No change history found for this block.";
    return [msg];
  }
  return vm.rows.map((row) => nodeRowElement(row, validation.verdicts[row.id] ?? "pending", handlers));
}

export function diffRowElements(rows: DiffRow[]): HTMLElement[] {
  return rows.map((diffRow, index) => {
    const line = document.createElement("div");
    line.className = `diff-row diff-${diffRow.kind}`;
    line.dataset.row = String(index);
    const left = document.createElement("span");
    left.className = "diff-left";
    left.textContent = diffRow.leftNum === null ? "" : `${diffRow.leftNum} ${diffRow.leftText}`;
    const right = document.createElement("span");
    right.className = "diff-right";
    right.textContent = diffRow.rightNum === null ? "" : `${diffRow.rightNum} ${diffRow.rightText}`;
    line.append(left, right);
    return line;
  });
}
