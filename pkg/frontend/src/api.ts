/**
 * Typed client for the wuiq project service. Every number the console
 * displays comes out of one of these responses; nothing is recomputed
 * on the client side.
 */

export interface ServiceErrorBody {
  error: { code: string; message: string; field?: string; details?: string[] };
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly field?: string;
  readonly details: string[];

  constructor(status: number, body: ServiceErrorBody["error"]) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.field = body.field;
    this.details = body.details ?? [];
  }
}

/** Network-level failure (service unreachable, timeout). */
export class ServiceUnreachable extends Error {
  constructor(cause: unknown) {
    super("service unreachable");
    this.name = "ServiceUnreachable";
    this.cause = cause;
  }
}

export interface QuestionnaireItem {
  index: number;
  subscale: string;
  phrasing: "positive" | "negative";
  text: string;
}

export interface PairJudgment {
  first: string;
  second: string;
  value: number;
  favors: "first" | "second" | "equal";
}

export interface ConsistencyPreview {
  weights: Record<string, number>;
  lambda_max: number;
  ci: number;
  ri: number;
  cr: number;
  accepted: boolean;
  threshold: number;
}

export interface ExpertConsistency {
  expert_id: string;
  cr: number;
  accepted: boolean;
}

export interface SurveyRecord {
  respondent_id: string;
  items: number[];
  review_text: string;
  duration_months: number;
  submitted_at?: string;
}

export interface IngestResult {
  ingested: number;
  total: number;
  replayed?: boolean;
  consistency?: ExpertConsistency[];
}

export interface ProjectSummary {
  project_id: string;
  criteria: string[];
  created_at: string;
  config: Record<string, unknown>;
  log_offsets: Record<string, number>;
}

export interface WeightsDocument {
  criteria: string[];
  weights: Record<string, number>;
  cr_threshold: number;
  accepted_count: number;
  experts: Array<{
    expert_id: string;
    role: string;
    cr: number;
    accepted: boolean;
  }>;
  computed_at: string;
}

export interface Iteration {
  t: number;
  scores: Record<string, number>;
  wuiq: number;
  display: string;
  grade: string;
  evaluated_at: string;
}

export interface IterationsDocument {
  project_id: string;
  iterations: Iteration[];
  computed_at: string;
}

export interface ClusterSummary {
  cluster: number;
  size: number;
  [feature: string]: number;
}

export interface SegmentsDocument {
  k: number;
  k_selection: "elbow" | "requested";
  sse: number;
  seed: number;
  feature_names: string[];
  respondents: string[];
  labels: number[];
  values: number[][];
  clusters: ClusterSummary[];
  scree: Array<{ k: number; sse: number }>;
  computed_at: string;
}

export interface AttributionRow {
  instance: string;
  cluster: number;
  group: string;
  group_value: number;
  phi: number;
  base_value: number;
  direction: string;
}

export interface ExplanationsDocument {
  cluster: number;
  mode: "indicator" | "soft";
  base_value: number;
  groups: string[];
  attributions: AttributionRow[];
  global_importance: Array<{ group: string; mean_abs_phi: number }>;
  computed_at: string;
}

export interface ReportDocument {
  project_id: string;
  criteria: string[];
  weights?: WeightsDocument;
  iterations?: IterationsDocument;
  segments?: SegmentsDocument;
  /** the most recently explained cluster, if any */
  explanations?: ExplanationsDocument;
  log_offsets: Record<string, number>;
}

/** Fresh idempotency token for a mutating request. */
export function requestToken(): string {
  if (typeof crypto !== "undefined" && typeof crypto.randomUUID === "function") {
    return crypto.randomUUID();
  }
  // old WebView fallback
  return `tok-${Date.now()}-${Math.random().toString(36).slice(2, 10)}`;
}

export class ApiClient {
  private readonly base: string;
  private readonly token?: string;

  constructor(baseUrl = "", authToken?: string) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.token = authToken;
  }

  project(): Promise<ProjectSummary> {
    return this.get("/api/project");
  }

  questionnaire(): Promise<{ items: QuestionnaireItem[] }> {
    return this.get("/api/questionnaire");
  }

  previewJudgments(judgments: PairJudgment[]): Promise<ConsistencyPreview> {
    return this.post("/api/experts/preview", { judgments });
  }

  submitExpert(
    expert: { expert_id: string; role: string; judgments: PairJudgment[] },
    token: string,
  ): Promise<IngestResult> {
    return this.post("/api/experts", {
      experts: [expert],
      request_token: token,
    });
  }

  submitSurvey(record: SurveyRecord, token: string): Promise<IngestResult> {
    return this.post("/api/surveys", {
      surveys: [record],
      request_token: token,
    });
  }

  weights(): Promise<WeightsDocument> {
    return this.get("/api/weights");
  }

  iterations(): Promise<IterationsDocument> {
    return this.get("/api/iterations");
  }

  segments(): Promise<SegmentsDocument> {
    return this.get("/api/segments/latest");
  }

  explanations(cluster: number, mode = "indicator"): Promise<ExplanationsDocument> {
    return this.get(
      `/api/segments/latest/explanations?cluster=${cluster}&mode=${mode}`,
    );
  }

  report(): Promise<ReportDocument> {
    return this.get("/api/report");
  }

  private get<T>(path: string): Promise<T> {
    return this.send<T>("GET", path);
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.send<T>("POST", path, body);
  }

  private async send<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { accept: "application/json" };
    if (body !== undefined) headers["content-type"] = "application/json";
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    let response: Response;
    try {
      response = await fetch(this.base + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ServiceUnreachable(err);
    }
    if (!response.ok) {
      let parsed: ServiceErrorBody | null = null;
      try {
        parsed = (await response.json()) as ServiceErrorBody;
      } catch {
        // non-JSON error body, fall through to the generic shape
      }
      if (parsed && parsed.error && typeof parsed.error.code === "string") {
        throw new ApiError(response.status, parsed.error);
      }
      throw new ApiError(response.status, {
        code: "internal",
        message: `unexpected ${response.status} response`,
      });
    }
    return (await response.json()) as T;
  }
}
