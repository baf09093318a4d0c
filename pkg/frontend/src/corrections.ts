/** Correction builders and the flush/retry protocol.
 *
 * The service serializes writers with an optimistic version: a stale flush
 * gets a 409 plus the current version, and the caller decides whether to
 * retry on top of the newer state (last writer wins only after that
 * explicit retry).
 */

import type { ApiClient } from "./api.js";
import type { CorrectionRecord, PostResult } from "./types.js";

export function moveRecord(
  tMs: number, ledId: string, x: number, y: number, author = "reviewer",
): CorrectionRecord {
  return { t_ms: tMs, led_id: ledId, action: "move", x, y, author };
}

export function reassignRecord(
  tMs: number, ledId: string, clusterRef: number, author = "reviewer",
): CorrectionRecord {
  return { t_ms: tMs, led_id: ledId, action: "reassign",
           cluster_ref: clusterRef, author };
}

export function deleteRecord(
  tMs: number, ledId: string, author = "reviewer",
): CorrectionRecord {
  return { t_ms: tMs, led_id: ledId, action: "delete", author };
}

export interface FlushOutcome {
  status: "ok" | "conflict" | "empty";
  version: number;
  labels: PostResult["labels"];
}

/** Post pending records against the known version. */
export async function flushCorrections(
  api: ApiClient,
  baseVersion: number,
  records: CorrectionRecord[],
): Promise<FlushOutcome> {
  if (records.length === 0) {
    return { status: "empty", version: baseVersion, labels: [] };
  }
  const result = await api.postCorrections(baseVersion, records);
  return { status: result.status, version: result.version,
           labels: result.labels };
}

/** Flush, and on a version conflict retry once on top of the fresh state.
 * Returns the conflict outcome when the retry also loses the race. */
export async function flushWithRetry(
  api: ApiClient,
  baseVersion: number,
  records: CorrectionRecord[],
): Promise<FlushOutcome> {
  const first = await flushCorrections(api, baseVersion, records);
  if (first.status !== "conflict") {
    return first;
  }
  return flushCorrections(api, first.version, records);
}
