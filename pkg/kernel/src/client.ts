/**
 * Thin HTTP client for the reference alignment endpoints of the synthesis
 * service. The service computes in float64 from the JSON payload, so the
 * numbers the kernel and the reference see are identical.
 */

export interface ReferencePath {
  assignment: number[];
  durations: number[];
  total: number;
}

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  async health(): Promise<boolean> {
    try {
      const resp = await fetch(`${this.baseUrl}/health`);
      return resp.ok;
    } catch {
      return false;
    }
  }

  async masBatch(items: { loglik: number[][] }[]): Promise<ReferencePath[]> {
    const resp = await fetch(`${this.baseUrl}/align/mas/batch`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ items }),
    });
    if (!resp.ok) {
      throw new Error(`service returned ${resp.status}: ${await resp.text()}`);
    }
    const body = (await resp.json()) as { items: ReferencePath[] };
    return body.items;
  }
}
