/**
 * Recommendation table: heat-colored category cells, punt-risk badges,
 * and a last-known-good cache for when the service is unreachable.
 *
 * Rows keep the service order (already sorted by v descending) and the
 * exact v values received; nothing is recomputed or re-rounded here.
 */

import {
  AssistantClient,
  RecommendationRow,
  RecommendationsResponse,
} from "./api";

export type HeatBand = "cold" | "cool" | "warm" | "hot";

/** Fixed breakpoints at 0.4 / 0.5 / 0.6 so cell colors are comparable
    across drafts regardless of the league's spread. */
export function heatBand(phi: number): HeatBand {
  if (phi < 0.4) return "cold";
  if (phi < 0.5) return "cool";
  if (phi < 0.6) return "warm";
  return "hot";
}

/** Expected end-of-season standard points in one category: last place is
    worth 1 point and each opponent beaten adds one expected point. */
export function projectedStandardPoints(
  avgPhi: number,
  numOpponents: number,
): number {
  return 1.0 + numOpponents * avgPhi;
}

export const PUNT_THRESHOLD = 1.5;

/** Categories this candidate's roster would effectively abandon. */
export function puntRiskCategories(
  row: RecommendationRow,
  numOpponents: number,
  threshold: number = PUNT_THRESHOLD,
): string[] {
  return Object.entries(row.category_win_probabilities)
    .filter(([, phi]) => projectedStandardPoints(phi, numOpponents) < threshold)
    .map(([name]) => name);
}

export interface RecommendationCell {
  category: string;
  phi: number;
  band: HeatBand;
}

export interface RecommendationViewRow {
  player_id: string;
  player_name: string;
  v: number;
  /** String(v): full precision, displayed exactly as received. */
  vText: string;
  delta_v: number;
  cells: RecommendationCell[];
  puntRisk: string[];
}

export function toViewRows(
  response: RecommendationsResponse,
  categories: string[],
  numOpponents: number,
): RecommendationViewRow[] {
  return response.recommendations.map((row) => ({
    player_id: row.player_id,
    player_name: row.player_name,
    v: row.v,
    vText: String(row.v),
    delta_v: row.delta_v,
    cells: categories.map((category) => {
      const phi = row.category_win_probabilities[category] ?? 0;
      return { category, phi, band: heatBand(phi) };
    }),
    puntRisk: puntRiskCategories(row, numOpponents),
  }));
}

export class RecommendationTable {
  rows: RecommendationViewRow[] = [];
  version = -1;
  baselinePlayerId: string | null = null;
  /** True when the shown rows are a cached table from a failed load. */
  stale = false;
  lastError: string | null = null;

  constructor(
    private readonly client: AssistantClient,
    private readonly draftId: string,
  ) {}

  async load(
    seat: number,
    width: number,
    categories: string[],
    numTeams: number,
  ): Promise<void> {
    try {
      const response = await this.client.getRecommendations(this.draftId, {
        seat,
        width,
      });
      this.rows = toViewRows(response, categories, numTeams - 1);
      this.version = response.version;
      this.baselinePlayerId = response.baseline_player_id;
      this.stale = false;
      this.lastError = null;
    } catch (err) {
      if (this.rows.length === 0) {
        throw err;
      }
      this.stale = true;
      this.lastError = err instanceof Error ? err.message : String(err);
    }
  }
}
