/**
 * Draft board page wiring: create a room against a running assistant
 * service, record picks for whichever seat is on the clock, and keep the
 * board and the recommendation table fresh by background polling.
 */

import { ApiError, AssistantClient } from "./api";
import { BoardViewModel } from "./board";
import { Poller } from "./poll";
import { RecommendationTable } from "./recommendations";

const RECOMMENDATION_WIDTH = 10;
const POLL_INTERVAL_MS = 2000;

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function numberInput(id: string): number {
  return Number(byId<HTMLInputElement>(id).value);
}

let client: AssistantClient;
let vm: BoardViewModel | null = null;
let recs: RecommendationTable | null = null;
let poller: Poller | null = null;
let recsVersion = -1;

async function createLeague(): Promise<void> {
  const status = byId<HTMLElement>("setup-status");
  status.textContent = "";
  client = new AssistantClient(byId<HTMLInputElement>("base-url").value.trim());
  try {
    const created = await client.createLeague({
      num_teams: numberInput("num-teams"),
      roster_size: numberInput("roster-size"),
      chi: numberInput("chi"),
      pool: {
        synthetic: { size: numberInput("pool-size"), seed: numberInput("pool-seed") },
      },
    });
    vm = new BoardViewModel(client, created.draft_id);
    vm.mySeat = numberInput("my-seat");
    recs = new RecommendationTable(client, created.draft_id);
    recsVersion = -1;
    await vm.refresh();
    byId<HTMLElement>("room-id").textContent = created.draft_id;
    byId<HTMLElement>("draft").hidden = false;
    poller?.stop();
    poller = new Poller(pollTick, POLL_INTERVAL_MS);
    poller.start();
    await pollTick();
  } catch (err) {
    status.textContent = err instanceof Error ? err.message : String(err);
  }
}

async function pollTick(): Promise<void> {
  if (!vm || !recs) {
    return;
  }
  await vm.refresh();
  const board = vm.board;
  if (board && !board.complete && vm.mySeat !== null && vm.version !== recsVersion) {
    await recs.load(
      vm.mySeat,
      RECOMMENDATION_WIDTH,
      board.categories,
      board.num_teams,
    );
    recsVersion = vm.version;
  }
  renderAll();
}

async function recordPick(playerId: string): Promise<void> {
  if (!vm) {
    return;
  }
  const turn = vm.currentTurn();
  if (!turn) {
    vm.inlineError = "the draft is complete";
    renderAll();
    return;
  }
  renderAll(); // show the optimistic row while the request is in flight
  await vm.submitPick(turn.seat, playerId);
  recsVersion = -1; // force a recommendation reload on the next tick
  await pollTick();
}

function renderAll(): void {
  if (!vm) {
    return;
  }
  renderBanner();
  renderBoard();
  renderPanel();
  renderRecommendations();
  renderRemaining();
  byId<HTMLElement>("inline-error").textContent = vm.inlineError ?? "";
}

function renderBanner(): void {
  const banner = byId<HTMLElement>("banner");
  if (!vm?.banner) {
    banner.hidden = true;
    return;
  }
  banner.hidden = false;
  banner.className = `banner banner-${vm.banner.kind}`;
  byId<HTMLElement>("banner-text").textContent = vm.banner.message;
}

function renderBoard(): void {
  if (!vm?.board) {
    return;
  }
  const board = vm.board;
  const turn = vm.currentTurn();
  byId<HTMLElement>("version").textContent = String(board.version);
  const table = byId<HTMLTableElement>("board-grid");
  table.textContent = "";
  const head = table.createTHead().insertRow();
  head.insertCell().textContent = "seat";
  for (let r = 0; r < board.roster_size; r++) {
    head.insertCell().textContent = `R${r + 1}`;
  }
  const body = table.createTBody();
  vm.grid().forEach((cells, seat) => {
    const row = body.insertRow();
    const label = row.insertCell();
    label.textContent = seat === vm!.mySeat ? `${seat} (me)` : String(seat);
    cells.forEach((pid, round) => {
      const cell = row.insertCell();
      cell.textContent = pid === null ? "" : vm!.playerName(pid);
      if (turn && turn.seat === seat && turn.round === round && pid === null) {
        cell.className = "on-clock";
        cell.textContent = "on the clock";
      }
    });
  });
}

function renderPanel(): void {
  const panel = vm?.seatPanel() ?? null;
  byId<HTMLElement>("panel").hidden = panel === null;
  if (!panel || !vm?.board) {
    return;
  }
  byId<HTMLElement>("panel-v").textContent = String(panel.v);
  byId<HTMLElement>("panel-mu").textContent = panel.mu_D.toFixed(3);
  const row = byId<HTMLTableRowElement>("panel-phi");
  row.textContent = "";
  for (const category of vm.board.categories) {
    const phi = panel.category_win_probabilities[category] ?? 0;
    const cell = row.insertCell();
    cell.textContent = `${category} ${phi.toFixed(2)}`;
    cell.className = `heat-${heatClass(phi)}`;
  }
}

function heatClass(phi: number): string {
  if (phi < 0.4) return "cold";
  if (phi < 0.5) return "cool";
  if (phi < 0.6) return "warm";
  return "hot";
}

function renderRecommendations(): void {
  if (!recs || !vm?.board) {
    return;
  }
  byId<HTMLElement>("recs-stale").hidden = !recs.stale;
  const table = byId<HTMLTableElement>("recs-table");
  table.textContent = "";
  const head = table.createTHead().insertRow();
  for (const title of ["player", "v", "delta", ...vm.board.categories, ""]) {
    head.insertCell().textContent = title;
  }
  const body = table.createTBody();
  for (const row of recs.rows) {
    const tr = body.insertRow();
    const name = tr.insertCell();
    const pick = document.createElement("a");
    pick.href = "#";
    pick.textContent = row.player_name;
    pick.addEventListener("click", (event) => {
      event.preventDefault();
      void recordPick(row.player_id);
    });
    name.appendChild(pick);
    tr.insertCell().textContent = row.vText;
    tr.insertCell().textContent = row.delta_v.toFixed(4);
    for (const cell of row.cells) {
      const td = tr.insertCell();
      td.textContent = cell.phi.toFixed(2);
      td.className = `heat-${cell.band}`;
    }
    const badge = tr.insertCell();
    if (row.puntRisk.length > 0) {
      const span = document.createElement("span");
      span.className = "badge";
      span.textContent = `punt ${row.puntRisk.join(", ")}`;
      badge.appendChild(span);
    }
  }
}

function renderRemaining(): void {
  if (!vm?.board) {
    return;
  }
  const list = byId<HTMLDataListElement>("remaining-list");
  list.textContent = "";
  for (const pid of vm.board.remaining) {
    const option = document.createElement("option");
    option.value = pid;
    option.label = vm.playerName(pid);
    list.appendChild(option);
  }
}

function init(): void {
  byId<HTMLButtonElement>("create").addEventListener("click", () => {
    void createLeague();
  });
  byId<HTMLButtonElement>("undo").addEventListener("click", () => {
    if (vm) {
      void vm.undoLast().then(() => pollTick());
    }
  });
  byId<HTMLButtonElement>("record").addEventListener("click", () => {
    const input = byId<HTMLInputElement>("pick-input");
    if (input.value) {
      void recordPick(input.value.trim());
      input.value = "";
    }
  });
  byId<HTMLButtonElement>("banner-dismiss").addEventListener("click", () => {
    vm?.dismissBanner();
    renderAll();
  });
}

document.addEventListener("DOMContentLoaded", init);
