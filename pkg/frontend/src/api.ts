import type {
  ClusterInfo,
  DocumentRow,
  JobSummary,
  KgStats,
  KgView,
  ReviewTriple,
  SelectionEntry,
  Stage,
  TopicMap,
} from "./types.js";

/** Error carrying the HTTP status and the server's detail message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function unwrap<T>(res: Response): Promise<T> {
  if (res.ok) return res.json() as Promise<T>;
  let detail = res.statusText || `HTTP ${res.status}`;
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, detail);
}

/**
 * Typed client for the documented endpoints. All reads are scoped to the
 * active job via ?job=; the server defaults to the newest job when unset.
 */
export class ApiClient {
  constructor(
    readonly base = "",
    private job = "",
  ) {}

  setJob(jobId: string): void {
    this.job = jobId;
  }

  private url(path: string, params: Record<string, string> = {}): string {
    const query = new URLSearchParams(params);
    // job endpoints carry the job id in the path; everything else is
    // scoped by the ?job= query parameter
    if (this.job && !path.startsWith("/jobs")) query.set("job", this.job);
    const qs = query.toString();
    return this.base + path + (qs ? `?${qs}` : "");
  }

  private get<T>(path: string, params: Record<string, string> = {}): Promise<T> {
    return fetch(this.url(path, params)).then((res) => unwrap<T>(res));
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return fetch(this.url(path), {
      method: "POST",
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    }).then((res) => unwrap<T>(res));
  }

  listJobs(): Promise<JobSummary[]> {
    return this.get("/jobs");
  }

  createJob(): Promise<JobSummary> {
    return this.post("/jobs");
  }

  runStage(jobId: string, stage: Stage): Promise<JobSummary> {
    return this.post(`/jobs/${encodeURIComponent(jobId)}/stages/${stage}`);
  }

  topicMap(): Promise<TopicMap> {
    return this.get("/topicmap");
  }

  clusters(): Promise<ClusterInfo[]> {
    return this.get("/clusters");
  }

  documents(filter: { term?: string; cluster?: number } = {}): Promise<DocumentRow[]> {
    const params: Record<string, string> = {};
    if (filter.term) params.term = filter.term;
    if (filter.cluster !== undefined) params.cluster = String(filter.cluster);
    return this.get("/documents", params);
  }

  selection(): Promise<SelectionEntry[]> {
    return this.get("/selection");
  }

  amendSelection(action: "add" | "remove", docId: string): Promise<SelectionEntry[]> {
    return this.post("/selection", { action, doc_id: docId });
  }

  reviewQueue(): Promise<ReviewTriple[]> {
    return this.get("/review/queue");
  }

  reviewAccept(tripleId: string): Promise<ReviewTriple> {
    return this.post(`/review/${encodeURIComponent(tripleId)}/accept`);
  }

  reviewReject(tripleId: string, reason = ""): Promise<ReviewTriple> {
    return this.post(`/review/${encodeURIComponent(tripleId)}/reject`, { reason });
  }

  kg(): Promise<KgView> {
    return this.get("/kg");
  }

  kgStats(): Promise<KgStats> {
    return this.get("/kg/stats");
  }
}
