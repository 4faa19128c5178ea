/**
 * Typed client for the draft assistant HTTP API.
 *
 * Field names mirror the wire format exactly; no mapping layer, so every
 * displayed value is the value the service sent. All objective math (v,
 * delta_v, per-category win probabilities) comes from the service.
 */

export interface CategoryWinProbabilities {
  [category: string]: number;
}

/** {mu, rho, sigma_c} document accepted by the CLI objective evaluator. */
export interface StateDocument {
  mu: number[][];
  rho: number[][];
  sigma_c: number[];
}

export interface PickRow {
  seat: number;
  player_id: string;
}

export interface SeatSummary {
  seat: number;
  v: number;
  mu_D: number;
  category_win_probabilities: CategoryWinProbabilities;
  state?: StateDocument;
}

export interface BoardState {
  draft_id: string;
  version: number;
  num_teams: number;
  roster_size: number;
  chi: number;
  categories: string[];
  complete: boolean;
  current_seat: number | null;
  round: number;
  picks: PickRow[];
  rosters: string[][];
  remaining: string[];
  players: { [playerId: string]: string };
  seat_summary?: SeatSummary;
}

export interface RecommendationRow {
  player_id: string;
  player_name: string;
  v: number;
  delta_v: number;
  category_win_probabilities: CategoryWinProbabilities;
  state?: StateDocument;
}

export interface RecommendationsResponse {
  draft_id: string;
  version: number;
  seat: number;
  width: number;
  baseline_player_id: string;
  recommendations: RecommendationRow[];
}

export interface PickAck {
  draft_id: string;
  version: number;
}

export interface PoolPlayer {
  player_id: string;
  player_name: string;
  means: number[];
  volumes: number[];
}

export interface CreateLeagueRequest {
  num_teams: number;
  roster_size: number;
  chi: number;
  categories?: { name: string; kind: "counting" | "percentage"; direction?: 1 | -1 }[];
  pool: {
    players?: PoolPlayer[];
    synthetic?: { size: number; seed?: number };
  };
}

export interface CreateLeagueResponse {
  draft_id: string;
  version: number;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

/** The board moved under us: expected_version no longer current. */
export class ConflictError extends ApiError {
  constructor(detail: string) {
    super(409, detail);
    this.name = "ConflictError";
  }
}

async function readDetail(response: Response): Promise<string> {
  try {
    const body: unknown = await response.json();
    if (
      typeof body === "object" &&
      body !== null &&
      typeof (body as { detail?: unknown }).detail === "string"
    ) {
      return (body as { detail: string }).detail;
    }
    return JSON.stringify(body);
  } catch {
    return response.statusText || `HTTP ${response.status}`;
  }
}

export class AssistantClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      const detail = await readDetail(response);
      if (response.status === 409) {
        throw new ConflictError(detail);
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createLeague(body: CreateLeagueRequest): Promise<CreateLeagueResponse> {
    return this.request<CreateLeagueResponse>("/leagues", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getBoard(
    draftId: string,
    opts?: { seat?: number; includeState?: boolean },
  ): Promise<BoardState> {
    const params = new URLSearchParams();
    if (opts?.seat !== undefined) {
      params.set("seat", String(opts.seat));
    }
    if (opts?.includeState) {
      params.set("include_state", "1");
    }
    const query = params.toString();
    return this.request<BoardState>(
      `/leagues/${draftId}` + (query ? `?${query}` : ""),
    );
  }

  recordPick(
    draftId: string,
    args: { expectedVersion: number; seat: number; playerId: string },
  ): Promise<PickAck> {
    return this.request<PickAck>(`/leagues/${draftId}/picks`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        expected_version: args.expectedVersion,
        seat: args.seat,
        player_id: args.playerId,
      }),
    });
  }

  undoLastPick(draftId: string): Promise<PickAck> {
    return this.request<PickAck>(`/leagues/${draftId}/picks/last`, {
      method: "DELETE",
    });
  }

  getRecommendations(
    draftId: string,
    args: { seat: number; width?: number; includeState?: boolean },
  ): Promise<RecommendationsResponse> {
    const params = new URLSearchParams();
    params.set("seat", String(args.seat));
    if (args.width !== undefined) {
      params.set("width", String(args.width));
    }
    if (args.includeState) {
      params.set("include_state", "1");
    }
    return this.request<RecommendationsResponse>(
      `/leagues/${draftId}/recommendations?${params.toString()}`,
    );
  }
}
