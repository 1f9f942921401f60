/**
 * Thin client for the job service.  All traffic goes through the public
 * endpoints; the fetch function is injectable for tests.
 */

export interface JobStatus {
  id: string;
  status: "queued" | "running" | "done" | "failed";
  submitted_at: string;
  finished_at: string | null;
  estimate_bytes: number;
  engine: string;
  error: string | null;
}

export interface SubmitOk {
  id: string;
  status: string;
  estimate_bytes: number;
  engine: string;
}

export interface Diagnostic {
  line: number;
  column: number;
  message: string;
}

export class SubmitRejected extends Error {
  constructor(
    readonly httpStatus: number,
    message: string,
    readonly diagnostics: Diagnostic[] = [],
    readonly requiredBytes: number | null = null,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

const MIN_POLL_INTERVAL_MS = 500;

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async submit(qmlText: string): Promise<SubmitOk> {
    const resp = await this.fetchFn(this.url("/jobs"), {
      method: "POST",
      headers: { "content-type": "application/xml" },
      body: qmlText,
    });
    if (resp.status === 202) return (await resp.json()) as SubmitOk;
    if (resp.status === 400) {
      const body = await resp.json();
      throw new SubmitRejected(400, body.detail ?? "invalid document",
                               body.diagnostics ?? []);
    }
    if (resp.status === 413) {
      const body = await resp.json();
      throw new SubmitRejected(413, body.detail ?? "job too large", [],
                               body.required_bytes ?? null);
    }
    throw new SubmitRejected(resp.status, `unexpected status ${resp.status}`);
  }

  async status(id: string): Promise<JobStatus> {
    const resp = await this.fetchFn(this.url(`/jobs/${id}`));
    if (!resp.ok) throw new Error(`status ${resp.status} for job ${id}`);
    return (await resp.json()) as JobStatus;
  }

  async list(): Promise<JobStatus[]> {
    const resp = await this.fetchFn(this.url("/jobs"));
    if (!resp.ok) throw new Error(`status ${resp.status}`);
    return ((await resp.json()) as { jobs: JobStatus[] }).jobs;
  }

  async result(id: string): Promise<string> {
    const resp = await this.fetchFn(this.url(`/jobs/${id}/result`));
    if (resp.status === 409) throw new Error("job is not finished yet");
    if (!resp.ok) throw new Error(`status ${resp.status} for job ${id}`);
    return await resp.text();
  }

  /**
   * Poll until the job reaches done/failed; reports every observed
   * status change.  The interval is clamped to the 500 ms floor the
   * service expects from clients.
   */
  async pollUntilDone(
    id: string,
    opts: {
      intervalMs?: number;
      onStatus?: (s: JobStatus) => void;
      sleep?: (ms: number) => Promise<void>;
    } = {},
  ): Promise<JobStatus> {
    const interval = Math.max(opts.intervalMs ?? 1000, MIN_POLL_INTERVAL_MS);
    const sleep =
      opts.sleep ?? ((ms: number) => new Promise((r) => setTimeout(r, ms)));
    let last = "";
    for (;;) {
      const status = await this.status(id);
      if (status.status !== last) {
        last = status.status;
        opts.onStatus?.(status);
      }
      if (status.status === "done" || status.status === "failed") {
        return status;
      }
      await sleep(interval);
    }
  }
}
