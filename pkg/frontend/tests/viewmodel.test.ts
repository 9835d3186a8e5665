import { describe, expect, it } from "vitest";

import { parseGraph } from "../src/types.js";
import {
  applyVerdict,
  buildViewModel,
  initialValidation,
  isComplete,
  spliceViewModel,
  validationFromSession,
} from "../src/viewmodel.js";
import { SIG, emptyGraph, forkGraph, linearGraph, splicedGraph } from "./fixtures.js";

describe("buildViewModel", () => {
  it("renders one row per node and keeps wire (newest-first) order", () => {
    const vm = buildViewModel(linearGraph());
    expect(vm.rows).toHaveLength(3);
    expect(vm.rows.map((r) => r.id)).toEqual([SIG.newest, SIG.middle, SIG.oldest]);
    expect(vm.empty).toBe(false);
  });

  it("attaches the in-edge changes and the introduced flag", () => {
    const vm = buildViewModel(linearGraph());
    expect(vm.rows[0]!.changes.map((c) => c.type)).toEqual(["body-change"]);
    expect(vm.rows[2]!.introduced).toBe(true);
  });

  it("puts author, date and change sentences into the tooltip", () => {
    const vm = buildViewModel(linearGraph());
    const tooltip = vm.rows[1]!.tooltip;
    expect(tooltip).toContain("dev — 2021-01-02T00:00:00+00:00");
    expect(tooltip).toContain("expression-change: The condition changed.");
  });

  it("splits fork parents into separate lanes", () => {
    const vm = buildViewModel(forkGraph());
    const lanes = Object.fromEntries(vm.rows.map((r) => [r.id, r.lane]));
    expect(lanes[SIG.merged]).toBe(0);
    expect(lanes[SIG.parentA]).not.toBe(lanes[SIG.parentB]);
    expect(vm.laneCount).toBe(2);
    expect(vm.parents[SIG.merged]).toHaveLength(2);
  });

  it("keeps a linear graph in a single lane", () => {
    const vm = buildViewModel(linearGraph());
    expect(vm.laneCount).toBe(1);
  });

  it("flags an empty graph", () => {
    const vm = buildViewModel(emptyGraph());
    expect(vm.empty).toBe(true);
    expect(vm.rows).toHaveLength(0);
  });
});

describe("wire schema validation", () => {
  it("accepts a valid payload", () => {
    expect(parseGraph(linearGraph())).not.toBeNull();
  });

  it("rejects a malformed payload (drives the schema-mismatch banner)", () => {
    expect(parseGraph({ nodes: "nope" })).toBeNull();
    const broken = linearGraph() as unknown as { nodes: Array<Record<string, unknown>> };
    delete broken.nodes[0]!.commitId;
    expect(parseGraph(broken)).toBeNull();
  });
});

describe("validation state", () => {
  it("starts pending and completes only when nothing is pending", () => {
    const vm = buildViewModel(linearGraph());
    let state = initialValidation(vm);
    expect(isComplete(state)).toBe(false);
    for (const row of vm.rows) state = applyVerdict(state, row.id, "confirmed");
    expect(isComplete(state)).toBe(true);
  });

  it("counts rejected-unresolved as decided", () => {
    const vm = buildViewModel(linearGraph());
    let state = initialValidation(vm);
    for (const row of vm.rows.slice(1)) state = applyVerdict(state, row.id, "confirmed");
    state = applyVerdict(state, vm.rows[0]!.id, "rejected-unresolved");
    expect(isComplete(state)).toBe(true);
    expect(state.verdicts[vm.rows[0]!.id]).toBe("rejected-unresolved");
  });

  it("reconstructs identical state from persisted session decisions", () => {
    const vm = buildViewModel(linearGraph());
    const commitOf = Object.fromEntries(vm.rows.map((r) => [r.id, r.commitId]));
    const decisions = {
      [commitOf[SIG.newest]!]: { verdict: "confirm" },
      [commitOf[SIG.oldest]!]: { verdict: "reject", correction: { filePath: "A.java", blockType: "if", line: 11 } },
    };
    const state = validationFromSession(vm, decisions);
    expect(state.verdicts[SIG.newest]).toBe("confirmed");
    expect(state.verdicts[SIG.middle]).toBe("pending");
    expect(state.verdicts[SIG.oldest]).toBe("rejected-corrected");
  });
});

describe("spliceViewModel", () => {
  it("replaces the column suffix after a corrected reject", () => {
    const before = buildViewModel(linearGraph());
    const { vm, replacedSuffix } = spliceViewModel(before, SIG.middle, splicedGraph());
    expect(replacedSuffix).toBe(true);
    expect(vm.rows.map((r) => r.id)).toEqual([SIG.newest, SIG.middle, SIG.corrected]);
    expect(vm.rows.map((r) => r.id)).not.toContain(SIG.oldest);
    // prefix (newer rows) kept their identity
    expect(vm.rows[0]!.id).toBe(before.rows[0]!.id);
  });
});
