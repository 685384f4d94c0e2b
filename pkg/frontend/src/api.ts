// Thin typed client for the /v1 API. The UI never computes schema costs
// itself; every number it shows comes through here.

import type {
  CatalogDoc,
  EpisodeEvent,
  RunStatus,
  SchemaRow,
  SortKey,
  WhatifOutcome,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
    private base = "",
  ) {}

  private post(path: string, body: string, contentType: string): Promise<Response> {
    return this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "Content-Type": contentType },
      body,
    });
  }

  postDataset(manifest: unknown): Promise<CatalogDoc> {
    return this.post("/v1/dataset", JSON.stringify(manifest), "application/json")
      .then((r) => unwrap<CatalogDoc>(r));
  }

  postConstraints(text: string): Promise<{ classes: number[][] }> {
    return this.post("/v1/constraints", text, "text/plain")
      .then((r) => unwrap<{ classes: number[][] }>(r));
  }

  postWorkload(doc: unknown): Promise<{ queries: unknown[] }> {
    return this.post("/v1/workload", JSON.stringify(doc), "application/json")
      .then((r) => unwrap<{ queries: unknown[] }>(r));
  }

  postParams(params: unknown): Promise<unknown> {
    return this.post("/v1/params", JSON.stringify(params), "application/json")
      .then((r) => unwrap(r));
  }

  start(): Promise<{ run: string; episodes: number }> {
    return this.post("/v1/run/start", "", "application/json")
      .then((r) => unwrap<{ run: string; episodes: number }>(r));
  }

  stop(): Promise<{ stopping: boolean }> {
    return this.post("/v1/run/stop", "", "application/json")
      .then((r) => unwrap<{ stopping: boolean }>(r));
  }

  status(): Promise<RunStatus> {
    return this.fetchFn(this.base + "/v1/run/status").then((r) => unwrap<RunStatus>(r));
  }

  schemas(sort: SortKey): Promise<SchemaRow[]> {
    return this.fetchFn(this.base + `/v1/schemas?sort=${sort}`)
      .then((r) => unwrap<SchemaRow[]>(r));
  }

  whatif(groups: number[][]): Promise<WhatifOutcome> {
    return this.post("/v1/whatif", JSON.stringify({ groups }), "application/json")
      .then((r) => unwrap<WhatifOutcome>(r));
  }

  ddlUrl(signature: string): string {
    return this.base + `/v1/export/ddl?signature=${encodeURIComponent(signature)}`;
  }
}

// One live event subscription. Returns an unsubscribe/close function.
export type StreamHandle = () => void;
export type StreamFactory = (
  since: number,
  onEvent: (event: EpisodeEvent) => void,
  onEnd: () => void,
) => StreamHandle;

// Production stream over EventSource; tests inject their own factory.
export function eventSourceStream(base = ""): StreamFactory {
  return (since, onEvent, onEnd) => {
    const source = new EventSource(`${base}/v1/run/events?since=${since}`);
    source.onmessage = (message) => {
      onEvent(JSON.parse(message.data) as EpisodeEvent);
    };
    source.onerror = () => {
      // the server closes the stream when the run finishes
      source.close();
      onEnd();
    };
    return () => source.close();
  };
}
