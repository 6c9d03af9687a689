// Thin typed client for the v1 endpoints. The fetch implementation is
// injectable so tests can run against recorded responses.

import type {
  Assessment,
  LocationSummary,
  ParameterInfo,
  Purpose,
  ReconciledRange,
  SeriesPoint,
} from "./types.js";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async get<T>(path: string, params?: Record<string, string>): Promise<T> {
    let url = this.baseUrl + path;
    if (params && Object.keys(params).length > 0) {
      url += "?" + new URLSearchParams(params).toString();
    }
    const resp = await this.fetchFn(url);
    const body = (await resp.json()) as Record<string, unknown>;
    if (!resp.ok) {
      throw new ApiError(
        resp.status,
        String(body["code"] ?? "UNKNOWN"),
        String(body["message"] ?? "request failed"),
      );
    }
    return body as T;
  }

  listLocations(bbox?: [number, number, number, number]): Promise<LocationSummary[]> {
    return this.get("/v1/locations", bbox ? { bbox: bbox.join(",") } : undefined);
  }

  getAssessment(locationId: string, purpose?: string): Promise<Assessment> {
    return this.get(
      `/v1/locations/${encodeURIComponent(locationId)}/assessment`,
      purpose ? { purpose } : undefined,
    );
  }

  getSeries(
    locationId: string,
    parameter: string,
    from: string,
    to: string,
    maxPoints: number,
  ): Promise<SeriesPoint[]> {
    return this.get(`/v1/locations/${encodeURIComponent(locationId)}/series`, {
      parameter,
      from,
      to,
      max_points: String(maxPoints),
    });
  }

  getPurposes(): Promise<Purpose[]> {
    return this.get("/v1/purposes");
  }

  getParameters(): Promise<ParameterInfo[]> {
    return this.get("/v1/parameters");
  }

  getStandards(purpose?: string): Promise<ReconciledRange[]> {
    return this.get("/v1/standards", purpose ? { purpose } : undefined);
  }
}
