import type { WireGraph } from "../src/types.js";

const C = (n: number) => String(n).repeat(40).slice(0, 40);

export const SIG = {
  newest: `aaaa0001@${C(3)}`,
  middle: `aaaa0002@${C(2)}`,
  oldest: `aaaa0003@${C(1)}`,
  merged: `bbbb0001@${C(3)}`,
  parentA: `bbbb0002@${C(2)}`,
  parentB: `bbbb0003@${C(2)}`,
  corrected: `cccc0001@${C(1)}`,
};

export function linearGraph(): WireGraph {
  return {
    start: SIG.newest,
    nodes: [
      {
        commitId: C(3), author: "dev", date: "2021-01-03T00:00:00+00:00",
        blockType: "if", file: "A.java", startLine: 5, endLine: 8, signature: SIG.newest,
      },
      {
        commitId: C(2), author: "dev", date: "2021-01-02T00:00:00+00:00",
        blockType: "if", file: "A.java", startLine: 5, endLine: 7, signature: SIG.middle,
      },
      {
        commitId: C(1), author: "ann", date: "2021-01-01T00:00:00+00:00",
        blockType: "if", file: "A.java", startLine: 4, endLine: 6, signature: SIG.oldest,
      },
    ],
    edges: [
      { from: SIG.middle, to: SIG.newest, changes: [{ type: "body-change", description: "The body changed." }] },
      { from: SIG.oldest, to: SIG.middle, changes: [{ type: "expression-change", description: "The condition changed." }] },
      { from: null, to: SIG.oldest, changes: [{ type: "introduced", description: "The block was introduced." }] },
    ],
  };
}

export function forkGraph(): WireGraph {
  return {
    start: SIG.merged,
    nodes: [
      {
        commitId: C(3), author: "dev", date: "2021-01-03T00:00:00+00:00",
        blockType: "catch", file: "A.java", startLine: 9, endLine: 12, signature: SIG.merged,
      },
      {
        commitId: C(2), author: "dev", date: "2021-01-02T00:00:00+00:00",
        blockType: "catch", file: "A.java", startLine: 9, endLine: 11, signature: SIG.parentA,
      },
      {
        commitId: C(2), author: "dev", date: "2021-01-02T00:00:00+00:00",
        blockType: "catch", file: "A.java", startLine: 12, endLine: 14, signature: SIG.parentB,
      },
    ],
    edges: [
      { from: SIG.parentA, to: SIG.merged, changes: [{ type: "block-merge", description: "Merged." }] },
      { from: SIG.parentB, to: SIG.merged, changes: [{ type: "block-merge", description: "Merged." }] },
      { from: null, to: SIG.parentA, changes: [{ type: "introduced", description: "Introduced." }] },
      { from: null, to: SIG.parentB, changes: [{ type: "introduced", description: "Introduced." }] },
    ],
  };
}

/** The linear graph after rejecting its oldest node with a correction: the
 * suffix below the middle node is replaced by the corrected element's run. */
export function splicedGraph(): WireGraph {
  const base = linearGraph();
  return {
    start: base.start,
    nodes: [
      base.nodes[0]!,
      base.nodes[1]!,
      {
        commitId: C(1), author: "ann", date: "2021-01-01T00:00:00+00:00",
        blockType: "if", file: "A.java", startLine: 11, endLine: 13, signature: SIG.corrected,
      },
    ],
    edges: [
      base.edges[0]!,
      { from: SIG.corrected, to: SIG.middle, changes: [{ type: "expression-change", description: "Corrected match." }] },
      { from: null, to: SIG.corrected, changes: [{ type: "introduced", description: "Introduced." }] },
    ],
  };
}

export function emptyGraph(): WireGraph {
  return { start: null, nodes: [], edges: [] };
}
