/** Typed client for the parsing service; no linguistic logic here. */

export interface ParseResponse {
  ma_lattice: string;
  md_lattice: string;
  dep_tree: string;
}

export interface LatticeResponse {
  ma_lattice: string;
  oov: number[];
}

export interface LineDiagnostic {
  line: number;
  error: string;
}

/** Non-2xx responses, with whatever structure the body carried. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly incident?: string,
    readonly lines?: LineDiagnostic[],
  ) {
    super(message);
  }
}

async function postJson(
  base: string,
  path: string,
  payload: unknown,
): Promise<unknown> {
  const response = await fetch(base + path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  const body: unknown = await response.json().catch(() => null);
  if (!response.ok) {
    const record = (body ?? {}) as Record<string, unknown>;
    throw new ServiceError(
      response.status,
      typeof record.error === "string" ? record.error : "service error",
      typeof record.incident === "string" ? record.incident : undefined,
      Array.isArray(record.lines)
        ? (record.lines as LineDiagnostic[])
        : undefined,
    );
  }
  return body;
}

export async function fetchJoint(
  base: string,
  sentence: string,
): Promise<ParseResponse> {
  return (await postJson(base, "/yap/heb/joint", {
    text: sentence,
  })) as ParseResponse;
}

export async function fetchLattice(
  base: string,
  sentence: string,
): Promise<LatticeResponse> {
  return (await postJson(base, "/yap/heb/lattice", {
    text: sentence,
  })) as LatticeResponse;
}

export async function postLexicon(
  base: string,
  lines: string[],
): Promise<number> {
  const body = (await postJson(base, "/admin/lexicon", { lines })) as {
    added: number;
  };
  return body.added;
}

/** An empty batch changes nothing; 404 means the endpoint is disabled. */
export async function adminEnabled(base: string): Promise<boolean> {
  try {
    await postJson(base, "/admin/lexicon", { lines: [] });
    return true;
  } catch (err) {
    if (err instanceof ServiceError && err.status === 404) return false;
    throw err;
  }
}

/**
 * Serializes submits: resolves null for any task superseded by a newer
 * one, so a slow early response can never overwrite a later view.
 */
export class LatestOnly {
  private sequence = 0;

  async run<T>(task: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.sequence;
    const value = await task();
    return ticket === this.sequence ? value : null;
  }
}
