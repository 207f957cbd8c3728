import { ApiError, ReviewApi } from "./api.js";
import { candidateColor, drawScene } from "./render.js";
import type { DecisionPayload, PairPayload, PendingEntry } from "./types.js";

const SKELETON = `
  <header class="topbar">
    <span id="title">trajectory match review</span>
    <span id="pending-count"></span>
    <button id="retry" hidden>retry</button>
  </header>
  <div id="error" class="error" hidden></div>
  <main class="layout">
    <nav>
      <ul id="pending-list"></ul>
    </nav>
    <section>
      <h2 id="pair-title"></h2>
      <canvas id="scene" width="760" height="520"></canvas>
      <div id="decision-banner" hidden></div>
      <table id="candidate-table">
        <thead id="candidate-head"></thead>
        <tbody id="candidate-body"></tbody>
      </table>
      <div id="freepick-row" hidden>
        <label>no candidates; pick any clear sequence:
          <select id="freepick"></select>
        </label>
      </div>
      <div class="submit-row">
        <input id="note" type="text" placeholder="note (optional)" />
        <button id="submit">record decision</button>
      </div>
    </section>
  </main>
`;

/** Review UI controller.  All state of record lives on the server; this
 * class only caches what the API returned and re-renders it. */
export class App {
  pending: PendingEntry[] = [];
  pair: PairPayload | null = null;
  selected: string | null = null;
  visible = new Set<string>();

  private root: HTMLElement;

  constructor(
    root: HTMLElement,
    private api: ReviewApi,
  ) {
    this.root = root;
    root.innerHTML = SKELETON;
    this.element("submit").addEventListener("click", () => void this.submit());
    this.element("retry").addEventListener("click", () => void this.init());
    this.element<HTMLSelectElement>("freepick").addEventListener("change", (event) => {
      this.selected = (event.target as HTMLSelectElement).value || null;
    });
  }

  element<T extends HTMLElement = HTMLElement>(id: string): T {
    const found = this.root.querySelector(`#${id}`);
    if (!found) throw new Error(`missing element #${id}`);
    return found as T;
  }

  async init(): Promise<void> {
    this.showError(null);
    try {
      const state = await this.api.getState();
      const pending = await this.api.getPending();
      this.pending = pending.pending;
      this.renderPendingList();
      this.renderCounts(state.counts.pending);
      if (this.pending.length > 0) {
        await this.openPair(this.pending[0].snowy_id);
      } else {
        this.element("pair-title").textContent = "nothing pending";
      }
    } catch (error) {
      this.showError(error);
    }
  }

  async openPair(snowyId: string): Promise<void> {
    this.showError(null);
    try {
      const pair = await this.api.getPair(snowyId);
      this.pair = pair;
      this.visible = new Set(pair.candidates.map((c) => c.clear_id));
      // Preselect the single obvious choice but never submit it.
      this.selected =
        pair.decision?.clear_id ?? (pair.candidates.length > 0 ? pair.candidates[0].clear_id : null);
      this.renderPair();
    } catch (error) {
      this.showError(error);
    }
  }

  async submit(): Promise<void> {
    if (!this.pair) return;
    if (!this.selected) {
      this.showError(new Error("select a clear sequence first"));
      return;
    }
    const note = this.element<HTMLInputElement>("note").value;
    try {
      const { status, body } = await this.api.postDecision(
        this.pair.snowy_id,
        this.selected,
        note,
      );
      if (body.result === "accepted") {
        const decidedId = this.pair.snowy_id;
        this.pending = this.pending.filter((entry) => entry.snowy_id !== decidedId);
        this.renderPendingList();
        this.renderCounts(body.pending ?? this.pending.length);
        this.element<HTMLInputElement>("note").value = "";
        if (this.pending.length > 0) {
          await this.openPair(this.pending[0].snowy_id);
        } else {
          this.pair = null;
          this.element("pair-title").textContent = "all matches decided";
          this.showDecision(null);
        }
      } else if (body.result === "conflict") {
        // Someone already decided: refresh from the server, display that
        // decision, and change nothing in the local queue.
        const snowyId = this.pair.snowy_id;
        await this.openPair(snowyId);
        this.showDecision(body.decision ?? this.pair?.decision ?? null);
        this.showError(
          new Error(`already decided for ${body.decision?.clear_id ?? "another sequence"}`),
        );
      } else {
        this.showError(new Error(body.reason ?? `rejected (${status})`));
      }
    } catch (error) {
      this.showError(error);
    }
  }

  renderCounts(pendingCount: number): void {
    this.element("pending-count").textContent = `${pendingCount} pending`;
  }

  renderPendingList(): void {
    const list = this.element("pending-list");
    list.innerHTML = "";
    for (const entry of this.pending) {
      const item = document.createElement("li");
      const button = document.createElement("button");
      button.textContent = `${entry.snowy_id} (tier ${entry.tier ?? "none"}, ${entry.status})`;
      button.dataset.snowyId = entry.snowy_id;
      button.addEventListener("click", () => void this.openPair(entry.snowy_id));
      item.appendChild(button);
      list.appendChild(item);
    }
  }

  renderPair(): void {
    const pair = this.pair;
    if (!pair) return;
    this.element("pair-title").textContent =
      `${pair.snowy_id} - tier ${pair.tier ?? "none"} (${pair.status})`;
    this.showDecision(pair.decision);
    this.renderCandidateTable();
    this.renderFreePick();
    this.redraw();
  }

  renderCandidateTable(): void {
    const pair = this.pair;
    if (!pair) return;
    const head = this.element("candidate-head");
    head.innerHTML = "";
    const headRow = document.createElement("tr");
    const columns = [
      "show",
      "pick",
      "clear sequence",
      ...pair.thetas.map((theta) => `cover @ ${theta} m`),
      "d_max (m)",
      "frames",
      "road users",
    ];
    for (const label of columns) {
      const cell = document.createElement("th");
      cell.textContent = label;
      headRow.appendChild(cell);
    }
    head.appendChild(headRow);

    const body = this.element("candidate-body");
    body.innerHTML = "";
    pair.candidates.forEach((candidate, index) => {
      const row = document.createElement("tr");
      row.className = "candidate-row";
      row.dataset.clearId = candidate.clear_id;

      const toggleCell = document.createElement("td");
      const toggle = document.createElement("input");
      toggle.type = "checkbox";
      toggle.checked = this.visible.has(candidate.clear_id);
      toggle.addEventListener("change", () => {
        if (toggle.checked) this.visible.add(candidate.clear_id);
        else this.visible.delete(candidate.clear_id);
        this.redraw();
      });
      toggleCell.appendChild(toggle);
      row.appendChild(toggleCell);

      const pickCell = document.createElement("td");
      const pick = document.createElement("input");
      pick.type = "radio";
      pick.name = "candidate";
      pick.checked = candidate.clear_id === this.selected;
      pick.addEventListener("change", () => {
        this.selected = candidate.clear_id;
        this.redraw();
      });
      pickCell.appendChild(pick);
      row.appendChild(pickCell);

      const name = document.createElement("td");
      name.textContent = candidate.clear_id;
      name.style.color = candidateColor(index);
      row.appendChild(name);

      for (const fraction of candidate.coverages) {
        const cell = document.createElement("td");
        cell.className = "coverage-cell";
        cell.textContent = fraction.toFixed(3);
        row.appendChild(cell);
      }
      const dmax = document.createElement("td");
      dmax.textContent = candidate.d_max === null ? "-" : candidate.d_max.toFixed(2);
      row.appendChild(dmax);
      const frames = document.createElement("td");
      frames.textContent = candidate.frame_count?.toString() ?? "-";
      row.appendChild(frames);
      const roadUsers = document.createElement("td");
      roadUsers.textContent = candidate.road_users?.toString() ?? "-";
      row.appendChild(roadUsers);

      body.appendChild(row);
    });
  }

  renderFreePick(): void {
    const pair = this.pair;
    if (!pair) return;
    const wrapper = this.element("freepick-row");
    const select = this.element<HTMLSelectElement>("freepick");
    if (pair.candidates.length > 0) {
      wrapper.hidden = true;
      return;
    }
    wrapper.hidden = false;
    select.innerHTML = "";
    const blank = document.createElement("option");
    blank.value = "";
    blank.textContent = "choose...";
    select.appendChild(blank);
    for (const clearId of pair.available_clear_ids) {
      const option = document.createElement("option");
      option.value = clearId;
      option.textContent = clearId;
      select.appendChild(option);
    }
    select.value = this.selected ?? "";
  }

  showDecision(decision: DecisionPayload | null): void {
    const banner = this.element("decision-banner");
    if (!decision) {
      banner.hidden = true;
      banner.textContent = "";
      return;
    }
    banner.hidden = false;
    banner.textContent =
      `decided: ${decision.clear_id} by ${decision.decided_by}` +
      (decision.note ? ` ("${decision.note}")` : "");
  }

  redraw(): void {
    if (!this.pair) return;
    drawScene(this.element<HTMLCanvasElement>("scene"), this.pair, this.visible, this.selected);
  }

  showError(error: unknown): void {
    const box = this.element("error");
    const retry = this.element("retry");
    if (error === null) {
      box.hidden = true;
      retry.hidden = true;
      box.textContent = "";
      return;
    }
    box.hidden = false;
    retry.hidden = false;
    const detail = error instanceof ApiError ? `service error ${error.status}` : String(error);
    box.textContent = detail;
  }
}

export function mountApp(root: HTMLElement, api: ReviewApi): App {
  return new App(root, api);
}
