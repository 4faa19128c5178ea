import { describe, expect, it } from "vitest";

import { ApiError, AssistantClient, ConflictError } from "../src/api";
import { jsonResponse, scriptedFetch } from "./helpers";

describe("AssistantClient", () => {
  it("posts league creation as JSON", async () => {
    const { fetchFn, calls } = scriptedFetch([
      () => jsonResponse({ draft_id: "abc", version: 0 }, 201),
    ]);
    const client = new AssistantClient("", fetchFn);
    const created = await client.createLeague({
      num_teams: 3,
      roster_size: 2,
      chi: 0.5,
      pool: { synthetic: { size: 10, seed: 1 } },
    });
    expect(created).toEqual({ draft_id: "abc", version: 0 });
    expect(calls[0]?.url).toBe("/leagues");
    expect(calls[0]?.method).toBe("POST");
    expect(calls[0]?.body).toEqual({
      num_teams: 3,
      roster_size: 2,
      chi: 0.5,
      pool: { synthetic: { size: 10, seed: 1 } },
    });
  });

  it("prefixes the base url", async () => {
    const { fetchFn, calls } = scriptedFetch([
      () => jsonResponse({ draft_id: "abc", version: 2 }),
    ]);
    const client = new AssistantClient("http://localhost:8000", fetchFn);
    await client.getBoard("abc");
    expect(calls[0]?.url).toBe("http://localhost:8000/leagues/abc");
  });

  it("builds board query parameters", async () => {
    const { fetchFn, calls } = scriptedFetch([
      () => jsonResponse({}),
      () => jsonResponse({}),
    ]);
    const client = new AssistantClient("", fetchFn);
    await client.getBoard("abc");
    await client.getBoard("abc", { seat: 0, includeState: true });
    expect(calls[0]?.url).toBe("/leagues/abc");
    expect(calls[1]?.url).toBe("/leagues/abc?seat=0&include_state=1");
  });

  it("sends picks with wire field names", async () => {
    const { fetchFn, calls } = scriptedFetch([
      () => jsonResponse({ draft_id: "abc", version: 1 }),
    ]);
    const client = new AssistantClient("", fetchFn);
    const ack = await client.recordPick("abc", {
      expectedVersion: 0,
      seat: 2,
      playerId: "p7",
    });
    expect(ack.version).toBe(1);
    expect(calls[0]?.url).toBe("/leagues/abc/picks");
    expect(calls[0]?.body).toEqual({
      expected_version: 0,
      seat: 2,
      player_id: "p7",
    });
  });

  it("undoes via DELETE on the last-pick resource", async () => {
    const { fetchFn, calls } = scriptedFetch([
      () => jsonResponse({ draft_id: "abc", version: 3 }),
    ]);
    const client = new AssistantClient("", fetchFn);
    await client.undoLastPick("abc");
    expect(calls[0]?.method).toBe("DELETE");
    expect(calls[0]?.url).toBe("/leagues/abc/picks/last");
  });

  it("builds recommendation query parameters", async () => {
    const { fetchFn, calls } = scriptedFetch([
      () => jsonResponse({ recommendations: [] }),
    ]);
    const client = new AssistantClient("", fetchFn);
    await client.getRecommendations("abc", { seat: 1, width: 10 });
    expect(calls[0]?.url).toBe("/leagues/abc/recommendations?seat=1&width=10");
  });

  it("raises ConflictError on 409", async () => {
    const { fetchFn } = scriptedFetch([
      () => jsonResponse({ detail: "version conflict: expected 0, current 2" }, 409),
    ]);
    const client = new AssistantClient("", fetchFn);
    const failure = client.recordPick("abc", {
      expectedVersion: 0,
      seat: 0,
      playerId: "p0",
    });
    await expect(failure).rejects.toBeInstanceOf(ConflictError);
    await expect(
      client.recordPick("abc", { expectedVersion: 0, seat: 0, playerId: "p0" }),
    ).rejects.toThrow("unexpected request");
  });

  it("raises ApiError with the service detail on 422", async () => {
    const { fetchFn } = scriptedFetch([
      () => jsonResponse({ detail: "player 'p9' is not available" }, 422),
    ]);
    const client = new AssistantClient("", fetchFn);
    const err = await client
      .recordPick("abc", { expectedVersion: 0, seat: 0, playerId: "p9" })
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err).not.toBeInstanceOf(ConflictError);
    expect((err as ApiError).status).toBe(422);
    expect((err as ApiError).detail).toBe("player 'p9' is not available");
  });

  it("falls back to the status text for non-JSON error bodies", async () => {
    const { fetchFn } = scriptedFetch([
      () => new Response("boom", { status: 500, statusText: "Server Error" }),
    ]);
    const client = new AssistantClient("", fetchFn);
    const err = await client.getBoard("abc").catch((e: unknown) => e);
    expect((err as ApiError).detail).toBe("Server Error");
  });
});
