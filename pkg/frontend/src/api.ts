/** Thin typed client over the review service.
 *
 * All numbers rendered by the UI come from these responses; the client
 * never derives centroids or costs itself.
 */

import type {
  ClusterInfo, CorrectionRecord, FramePayload, LabelRow, PostResult,
  SessionMeta,
} from "./types.js";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.base + path);
    if (!resp.ok) {
      const body = await resp.text();
      throw new ApiError(resp.status, `${path}: ${body}`);
    }
    return (await resp.json()) as T;
  }

  session(): Promise<SessionMeta> {
    return this.getJson<SessionMeta>("/session");
  }

  frames(t0Ms: number, t1Ms: number): Promise<FramePayload> {
    return this.getJson<FramePayload>(`/frames?t0_ms=${t0Ms}&t1_ms=${t1Ms}`);
  }

  clusters(tMs: number): Promise<{ t_ms: number; clusters: ClusterInfo[] }> {
    return this.getJson(`/clusters?t_ms=${tMs}`);
  }

  labels(t0Ms: number, t1Ms: number): Promise<LabelRow[]> {
    return this.getJson<{ labels: LabelRow[] }>(
      `/labels?t0_ms=${t0Ms}&t1_ms=${t1Ms}`,
    ).then((b) => b.labels);
  }

  /** Append corrections; a 409 maps to a conflict result, not an error. */
  async postCorrections(
    baseVersion: number,
    records: CorrectionRecord[],
  ): Promise<PostResult> {
    const resp = await this.fetchFn(this.base + "/corrections", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ base_version: baseVersion, records }),
    });
    const body = await resp.json();
    if (resp.status === 409) {
      return { status: "conflict", version: body.current_version, labels: [] };
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, JSON.stringify(body));
    }
    return { status: "ok", version: body.version, labels: body.labels };
  }

  /** Corrected label file, exactly as the service would persist it. */
  async exportLabels(): Promise<string> {
    const resp = await this.fetchFn(this.base + "/export");
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return resp.text();
  }
}
