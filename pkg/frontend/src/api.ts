// HTTP client for the facade; every mutation the UI performs goes through here.

import { parseGraph, type Correction, type SessionState, type WireGraph } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export interface TrackResult {
  graph: WireGraph;
  sessionId: string | null;
}

export interface DecisionResult {
  status: string;
  resumedFrom?: string;
}

async function expectJson(response: Response): Promise<unknown> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response.json();
}

export class FacadeClient {
  constructor(
    private readonly base: string = "",
    private readonly fetcher: typeof fetch = fetch,
  ) {}

  private url(path: string, params?: Record<string, string | number>): string {
    const query = params
      ? "?" +
        Object.entries(params)
          .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
          .join("&")
      : "";
    return `${this.base}${path}${query}`;
  }

  async elementType(
    repo: string,
    commit: string,
    filePath: string,
    line: number,
    selection: string,
  ): Promise<string> {
    const data = (await expectJson(
      await this.fetcher(this.url("/api/element-type", { repo, commit, filePath, line, selection })),
    )) as { elementType: string };
    return data.elementType;
  }

  async fileContent(repo: string, commit: string, path: string): Promise<string> {
    const data = (await expectJson(
      await this.fetcher(this.url("/api/file", { repo, commit, path })),
    )) as { content: string };
    return data.content;
  }

  async track(request: {
    repoPath: string;
    commit: string;
    filePath: string;
    blockType: string;
    line: number;
  }): Promise<TrackResult> {
    const response = await this.fetcher(this.url("/api/track"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    const payload = await expectJson(response);
    const graph = parseGraph(payload);
    if (graph === null) {
      throw new ApiError(500, "track response does not match the wire schema");
    }
    return { graph, sessionId: response.headers.get("X-Blocktrace-Session") };
  }

  async session(sessionId: string): Promise<SessionState> {
    return (await expectJson(
      await this.fetcher(this.url(`/api/session/${sessionId}`)),
    )) as SessionState;
  }

  async sessionOracle(sessionId: string): Promise<unknown> {
    return expectJson(await this.fetcher(this.url(`/api/session/${sessionId}/oracle`)));
  }

  async decide(
    sessionId: string,
    commitId: string,
    verdict: "confirm" | "reject",
    correction?: Correction,
  ): Promise<DecisionResult> {
    const response = await this.fetcher(this.url(`/api/session/${sessionId}/decision`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ commitId, verdict, correction: correction ?? null }),
    });
    return (await expectJson(response)) as DecisionResult;
  }
}
