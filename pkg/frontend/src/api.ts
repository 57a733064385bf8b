import type {
  CampaignSummary,
  GenerationDoc,
  LineageDoc,
  ProfileDoc,
  ReportDoc,
} from "./types.js";

/** Server-side command rejection with its stable machine-readable code. */
export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function reject(response: Response): Promise<never> {
  let code = "http-error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as {
      error?: { code?: string; message?: string };
    };
    if (body.error?.code) code = body.error.code;
    if (body.error?.message) message = body.error.message;
  } catch {
    // non-JSON body, keep the HTTP status text
  }
  throw new ApiError(code, message, response.status);
}

/** Typed client for one campaign server. All mutations go through here. */
export class CampaignApi {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    if (!response.ok) await reject(response);
    return (await response.json()) as T;
  }

  campaign(): Promise<CampaignSummary> {
    return this.getJson("/api/campaign");
  }

  generation(g: number): Promise<GenerationDoc> {
    return this.getJson(`/api/generations/${g}`);
  }

  profile(g: number, i: number, samples = 65): Promise<ProfileDoc> {
    return this.getJson(
      `/api/generations/${g}/children/${i}/profile?samples=${samples}`,
    );
  }

  stlUrl(g: number, i: number): string {
    return `${this.base}/api/generations/${g}/children/${i}/stl`;
  }

  async recordRepeat(
    g: number,
    i: number,
    forceNewtons: number,
  ): Promise<CampaignSummary> {
    const response = await this.fetchFn(
      `${this.base}/api/generations/${g}/children/${i}/repeats`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ force_newtons: forceNewtons }),
      },
    );
    if (!response.ok) await reject(response);
    return (await response.json()) as CampaignSummary;
  }

  async advance(): Promise<CampaignSummary> {
    const response = await this.fetchFn(`${this.base}/api/advance`, {
      method: "POST",
    });
    if (!response.ok) await reject(response);
    return (await response.json()) as CampaignSummary;
  }

  lineage(): Promise<LineageDoc> {
    return this.getJson("/api/lineage");
  }

  reportJson(): Promise<ReportDoc> {
    return this.getJson("/api/report?format=json");
  }

  async reportCsv(): Promise<string> {
    const response = await this.fetchFn(`${this.base}/api/report?format=csv`);
    if (!response.ok) await reject(response);
    return response.text();
  }
}
