// Pure view-model layer: the chronological node column with fork lanes,
// tooltips, and the per-node validation state machine. The DOM layer renders
// exactly what this module computes, so tests exercise it directly.

import type { WireChange, WireGraph } from "./types.js";

export type NodeVerdict =
  | "pending"
  | "confirmed"
  | "rejected-corrected"
  | "rejected-unresolved";

export interface NodeRow {
  id: string;
  commitId: string;
  shortId: string;
  author: string;
  date: string;
  blockType: string;
  file: string;
  startLine: number;
  endLine: number;
  lane: number;
  changes: WireChange[];
  introduced: boolean;
  tooltip: string;
}

export interface GraphViewModel {
  rows: NodeRow[];
  laneCount: number;
  empty: boolean;
  /** ids of the parent rows of each node (merge nodes have several) */
  parents: Record<string, string[]>;
}

export function buildViewModel(graph: WireGraph): GraphViewModel {
  if (graph.nodes.length === 0) {
    return { rows: [], laneCount: 0, empty: true, parents: {} };
  }
  // Per-node changes are carried by the edges pointing at the node.
  const changesAt = new Map<string, WireChange[]>();
  const parents = new Map<string, string[]>();
  for (const edge of graph.edges) {
    const list = changesAt.get(edge.to) ?? [];
    list.push(...edge.changes);
    changesAt.set(edge.to, list);
    if (edge.from !== null) {
      const p = parents.get(edge.to) ?? [];
      p.push(edge.from);
      parents.set(edge.to, p);
    }
  }

  // The wire order is newest-to-oldest already; lanes fan out where a node
  // has several parents (a fork), and every parent gets its own lane.
  const lanes = new Map<string, number>();
  let nextLane = 0;
  const rows: NodeRow[] = [];
  for (const node of graph.nodes) {
    let lane = lanes.get(node.signature);
    if (lane === undefined) {
      lane = nextLane++;
      lanes.set(node.signature, lane);
    }
    const parentIds = [...(parents.get(node.signature) ?? [])].sort();
    parentIds.forEach((pid, index) => {
      if (!lanes.has(pid)) {
        lanes.set(pid, index === 0 ? lane! : nextLane++);
      }
    });
    const changes = changesAt.get(node.signature) ?? [];
    const introduced = changes.some((c) => c.type === "introduced");
    rows.push({
      id: node.signature,
      commitId: node.commitId,
      shortId: node.commitId.slice(0, 8),
      author: node.author,
      date: node.date,
      blockType: node.blockType,
      file: node.file,
      startLine: node.startLine,
      endLine: node.endLine,
      lane,
      changes,
      introduced,
      tooltip: tooltipFor(node.author, node.date, changes),
    });
  }
  const laneCount = Math.max(...rows.map((r) => r.lane)) + 1;
  const parentRecord: Record<string, string[]> = {};
  for (const [k, v] of parents) parentRecord[k] = v;
  return { rows, laneCount, empty: false, parents: parentRecord };
}

export function tooltipFor(author: string, date: string, changes: WireChange[]): string {
  const lines = [`${author} — ${date}`];
  if (changes.length === 0) {
    lines.push("No block-level change recorded at this commit.");
  }
  for (const change of changes) {
    lines.push(`${change.type}: ${change.description}`);
  }
  return lines.join("\n");
}

// -- validation state ---------------------------------------------------------

export interface ValidationState {
  verdicts: Record<string, NodeVerdict>;
}

export function initialValidation(vm: GraphViewModel): ValidationState {
  const verdicts: Record<string, NodeVerdict> = {};
  for (const row of vm.rows) verdicts[row.id] = "pending";
  return { verdicts };
}

/** Rebuild the per-node state from the session's persisted decisions. */
export function validationFromSession(
  vm: GraphViewModel,
  decisions: Record<string, { verdict: string; correction?: unknown }>,
): ValidationState {
  const state = initialValidation(vm);
  for (const row of vm.rows) {
    const decision = decisions[row.commitId];
    if (!decision) continue;
    if (decision.verdict === "confirm") {
      state.verdicts[row.id] = "confirmed";
    } else if (decision.verdict === "reject") {
      state.verdicts[row.id] = decision.correction ? "rejected-corrected" : "rejected-unresolved";
    }
  }
  return state;
}

export function applyVerdict(
  state: ValidationState,
  nodeId: string,
  verdict: NodeVerdict,
): ValidationState {
  return { verdicts: { ...state.verdicts, [nodeId]: verdict } };
}

export function isComplete(state: ValidationState): boolean {
  return Object.values(state.verdicts).every((v) => v !== "pending");
}

/**
 * Splice after a reject+correction: the refreshed session graph replaces the
 * column. Rows at or newer than the rejected node keep their identity; the
 * suffix below it is whatever the corrected re-run produced.
 */
export function spliceViewModel(
  previous: GraphViewModel,
  rejectedNodeId: string,
  refreshed: WireGraph,
): { vm: GraphViewModel; replacedSuffix: boolean } {
  const next = buildViewModel(refreshed);
  const cut = previous.rows.findIndex((r) => r.id === rejectedNodeId);
  const oldSuffix = cut >= 0 ? previous.rows.slice(cut + 1).map((r) => r.id) : [];
  const newIds = new Set(next.rows.map((r) => r.id));
  const replacedSuffix = oldSuffix.some((id) => !newIds.has(id)) || oldSuffix.length === 0;
  return { vm: next, replacedSuffix };
}
