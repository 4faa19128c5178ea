/** Scripted fetch doubles for exercising the client without a server. */

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export type Step = (url: string, init?: RequestInit) => Response | Promise<Response>;

/** Returns a fetch-like function that consumes one step per call and
    records every request it saw. */
export function scriptedFetch(steps: Step[]) {
  const calls: RecordedCall[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
    });
    const step = steps.shift();
    if (!step) {
      throw new Error(`unexpected request: ${init?.method ?? "GET"} ${url}`);
    }
    return step(url, init);
  };
  return { fetchFn, calls };
}
