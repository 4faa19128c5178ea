/**
 * Board view model: the seat grid, the current turn marker, and the
 * optimistic pick flow.
 *
 * The board always reflects the latest acknowledged service version. A
 * submitted pick is inserted optimistically (the version is NOT bumped);
 * the acknowledgment refreshes from the service, and a stale-version
 * conflict rolls the insert back, refreshes, and raises a banner.
 */

import {
  ApiError,
  AssistantClient,
  BoardState,
  ConflictError,
  SeatSummary,
} from "./api";

export type BannerKind = "conflict" | "stale" | "offline";

export interface Banner {
  kind: BannerKind;
  message: string;
}

export class BoardViewModel {
  board: BoardState | null = null;
  /** Seat whose panel (v, mu_D, phi row) is shown; null hides the panel. */
  mySeat: number | null = null;
  banner: Banner | null = null;
  inlineError: string | null = null;
  private pending = false;

  constructor(
    private readonly client: AssistantClient,
    readonly draftId: string,
  ) {}

  get version(): number {
    return this.board ? this.board.version : -1;
  }

  get submitting(): boolean {
    return this.pending;
  }

  currentTurn(): { seat: number; round: number } | null {
    if (!this.board || this.board.current_seat === null) {
      return null;
    }
    return { seat: this.board.current_seat, round: this.board.round };
  }

  /** num_teams x roster_size matrix of player ids; empty cells are null.
      Pick i belongs to round floor(i / num_teams) and lands in its seat's
      row, which is exactly the snake cell the service assigned. */
  grid(): (string | null)[][] {
    if (!this.board) {
      return [];
    }
    const { num_teams, roster_size, picks } = this.board;
    const cells: (string | null)[][] = Array.from({ length: num_teams }, () =>
      new Array<string | null>(roster_size).fill(null),
    );
    picks.forEach((pick, i) => {
      const round = Math.floor(i / num_teams);
      const row = cells[pick.seat];
      if (row && round < roster_size) {
        row[round] = pick.player_id;
      }
    });
    return cells;
  }

  playerName(playerId: string): string {
    return this.board?.players[playerId] ?? playerId;
  }

  seatPanel(): SeatSummary | null {
    return this.board?.seat_summary ?? null;
  }

  async refresh(): Promise<void> {
    const opts = this.mySeat === null ? undefined : { seat: this.mySeat };
    this.applyExternal(await this.client.getBoard(this.draftId, opts));
  }

  /** Accepts a polled board only if it is at least as new as the one
      shown; a slow response racing a newer one must not regress it. */
  applyExternal(board: BoardState): boolean {
    if (this.board && board.version < this.board.version) {
      return false;
    }
    this.board = board;
    return true;
  }

  /**
   * Record a pick at the acknowledged version.
   *
   * Already-drafted players are blocked client-side without a request.
   * On success the board is re-fetched so the version, turn marker, and
   * any picks made elsewhere are authoritative. On a version conflict
   * the optimistic row is rolled back, the board refreshed, and a
   * banner raised; validation failures roll back and surface inline.
   */
  async submitPick(seat: number, playerId: string): Promise<boolean> {
    if (!this.board || this.pending) {
      return false;
    }
    this.inlineError = null;
    if (!this.board.remaining.includes(playerId)) {
      this.inlineError = `${this.playerName(playerId)} is already drafted`;
      return false;
    }
    const snapshot = this.board;
    this.board = optimisticInsert(snapshot, seat, playerId);
    this.pending = true;
    try {
      await this.client.recordPick(this.draftId, {
        expectedVersion: snapshot.version,
        seat,
        playerId,
      });
      await this.refresh();
      return true;
    } catch (err) {
      this.board = snapshot;
      if (err instanceof ConflictError) {
        this.banner = {
          kind: "conflict",
          message: "Pick rejected: the board moved. Showing the latest version.",
        };
        await this.refresh();
      } else if (err instanceof ApiError) {
        this.inlineError = err.detail;
      } else {
        this.banner = {
          kind: "offline",
          message: "Could not reach the draft service.",
        };
      }
      return false;
    } finally {
      this.pending = false;
    }
  }

  async undoLast(): Promise<void> {
    this.inlineError = null;
    try {
      await this.client.undoLastPick(this.draftId);
      await this.refresh();
    } catch (err) {
      if (err instanceof ApiError) {
        this.inlineError = err.detail;
      } else {
        throw err;
      }
    }
  }

  dismissBanner(): void {
    this.banner = null;
  }
}

function optimisticInsert(
  board: BoardState,
  seat: number,
  playerId: string,
): BoardState {
  return {
    ...board,
    picks: [...board.picks, { seat, player_id: playerId }],
    rosters: board.rosters.map((roster, s) =>
      s === seat ? [...roster, playerId] : roster,
    ),
    remaining: board.remaining.filter((pid) => pid !== playerId),
  };
}
