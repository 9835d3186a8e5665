// Line-level LCS diff for the side-by-side view.

export interface DiffRow {
  kind: "same" | "add" | "del";
  leftNum: number | null;
  leftText: string;
  rightNum: number | null;
  rightText: string;
}

export function lineDiff(before: string, after: string): DiffRow[] {
  const a = before.split("\n");
  const b = after.split("\n");
  const n = a.length;
  const m = b.length;
  const lcs: number[][] = Array.from({ length: n + 1 }, () => new Array<number>(m + 1).fill(0));
  for (let i = n - 1; i >= 0; i--) {
    for (let j = m - 1; j >= 0; j--) {
      lcs[i]![j] = a[i] === b[j] ? lcs[i + 1]![j + 1]! + 1 : Math.max(lcs[i + 1]![j]!, lcs[i]![j + 1]!);
    }
  }
  const rows: DiffRow[] = [];
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (a[i] === b[j]) {
      rows.push({ kind: "same", leftNum: i + 1, leftText: a[i]!, rightNum: j + 1, rightText: b[j]! });
      i++;
      j++;
    } else if (lcs[i + 1]![j]! >= lcs[i]![j + 1]!) {
      rows.push({ kind: "del", leftNum: i + 1, leftText: a[i]!, rightNum: null, rightText: "" });
      i++;
    } else {
      rows.push({ kind: "add", leftNum: null, leftText: "", rightNum: j + 1, rightText: b[j]! });
      j++;
    }
  }
  for (; i < n; i++) rows.push({ kind: "del", leftNum: i + 1, leftText: a[i]!, rightNum: null, rightText: "" });
  for (; j < m; j++) rows.push({ kind: "add", leftNum: null, leftText: "", rightNum: j + 1, rightText: b[j]! });
  return rows;
}

/** Index of the diff row showing `rightLine` on the right-hand side. */
export function rowIndexForRightLine(rows: DiffRow[], rightLine: number): number {
  const index = rows.findIndex((r) => r.rightNum === rightLine);
  return index >= 0 ? index : 0;
}
