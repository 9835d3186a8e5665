// Wire format of the tracking service (the single format of record) plus the
// session/oracle shapes the validation workflow exchanges with the facade.

import { z } from "zod";

export const WireChange = z.object({
  type: z.string(),
  description: z.string(),
});

export const WireNode = z.object({
  commitId: z.string().length(40),
  author: z.string(),
  date: z.string(),
  blockType: z.string(),
  file: z.string(),
  startLine: z.number().int(),
  endLine: z.number().int(),
  signature: z.string(),
});

export const WireEdge = z.object({
  from: z.string().nullable(),
  to: z.string(),
  changes: z.array(WireChange),
});

export const WireGraph = z.object({
  start: z.string().nullable(),
  nodes: z.array(WireNode),
  edges: z.array(WireEdge),
});

export type WireChange = z.infer<typeof WireChange>;
export type WireNode = z.infer<typeof WireNode>;
export type WireEdge = z.infer<typeof WireEdge>;
export type WireGraph = z.infer<typeof WireGraph>;

export interface Correction {
  filePath: string;
  blockType: string;
  line: number;
}

export type DecisionVerdict = "confirm" | "reject";

export interface SessionDecision {
  verdict: DecisionVerdict;
  correction?: Correction;
}

export interface SessionState {
  sessionId: string;
  request: Record<string, unknown>;
  status: "open" | "unresolved" | "complete";
  decisions: Record<string, SessionDecision>;
  graph: WireGraph;
}

export interface OracleChange {
  commitId: string;
  changeTypes: string[];
  elementKeyBefore?: string | null;
  elementKeyAfter?: string | null;
}

export interface OracleEntry {
  schemaVersion: number;
  repository: string;
  file: string;
  block_kind: string;
  block_key: string;
  existedSinceFirstCommit: boolean;
  expected: OracleChange[];
}

export function parseGraph(payload: unknown): WireGraph | null {
  const result = WireGraph.safeParse(payload);
  return result.success ? result.data : null;
}
