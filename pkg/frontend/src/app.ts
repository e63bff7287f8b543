// Browser entry point: a create-session form, the pairwise comparison loop,
// and the final menu. The session id lives in the URL; everything else is
// re-fetched from the service, so a refresh resumes exactly where the
// server says the session is.

import { ApiClient, ApiError } from "./client";
import { pollUntil, sleep } from "./poll";
import { MenuDocT, ProblemEntryT, QueryDocT, StateDocT } from "./schema";
import { buildMenuView, buildQueryView, QueryCard } from "./viewmodel";

const client = new ApiClient("");

function el(tag: string, cls?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function root(): HTMLElement {
  return document.getElementById("app")!;
}

function banner(message: string, retry?: () => void) {
  const box = el("div", "banner error");
  box.appendChild(el("span", "", message));
  if (retry) {
    const btn = el("button", "", "Retry") as HTMLButtonElement;
    btn.onclick = retry;
    box.appendChild(btn);
  }
  root().replaceChildren(box);
}

function sessionIdFromUrl(): string | null {
  return new URLSearchParams(window.location.search).get("session");
}

function gotoSession(id: string) {
  const url = new URL(window.location.href);
  url.searchParams.set("session", id);
  window.history.pushState({}, "", url);
  void sessionPage(id);
}

// --------------------------------------------------------------------------
// Create-session form
// --------------------------------------------------------------------------

async function formPage() {
  let problems: ProblemEntryT[];
  try {
    problems = (await client.problems()).problems;
  } catch (err) {
    banner(`Cannot reach the service: ${String(err)}`, () => void formPage());
    return;
  }
  const box = el("div", "form-card");
  box.appendChild(el("h1", "", "Start an elicitation session"));

  const probSel = el("select") as HTMLSelectElement;
  for (const p of problems) {
    const opt = el("option", "", `${p.id}  (${p.d} vars, ${p.m} objectives)`) as HTMLOptionElement;
    opt.value = p.id;
    probSel.appendChild(opt);
  }
  const variantSel = el("select") as HTMLSelectElement;
  for (const v of ["int-obj", "int-dec"]) {
    const opt = el("option", "", v) as HTMLOptionElement;
    opt.value = v;
    variantSel.appendChild(opt);
  }
  const budgetInput = el("input") as HTMLInputElement;
  budgetInput.type = "number";
  budgetInput.value = "10";
  const errLine = el("div", "field-error", "");

  const submit = el("button", "primary", "Create session") as HTMLButtonElement;
  submit.onclick = async () => {
    const budget = Number(budgetInput.value);
    if (!Number.isInteger(budget) || budget < 0) {
      errLine.textContent = "budget must be a non-negative integer";
      return;
    }
    errLine.textContent = "";
    submit.disabled = true;
    try {
      const created = await client.createSession({
        problem: probSel.value,
        variant: variantSel.value,
        budget,
        dm_mode: "live",
      });
      gotoSession(created.id);
    } catch (err) {
      submit.disabled = false;
      errLine.textContent =
        err instanceof ApiError ? String(err.body["error"]) : String(err);
    }
  };

  const row = (label: string, control: HTMLElement) => {
    const line = el("label", "form-row");
    line.appendChild(el("span", "", label));
    line.appendChild(control);
    return line;
  };
  box.appendChild(row("Problem", probSel));
  box.appendChild(row("Variant", variantSel));
  box.appendChild(row("Budget", budgetInput));
  box.appendChild(errLine);
  box.appendChild(submit);
  root().replaceChildren(box);
}

// --------------------------------------------------------------------------
// Session flow
// --------------------------------------------------------------------------

function renderCard(card: QueryCard, onPick: () => void, disabled: boolean): HTMLElement {
  const box = el("div", "option-card");
  box.appendChild(el("h2", "", card.label));
  if (card.radarPoints) {
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("viewBox", "0 0 100 100");
    svg.setAttribute("class", "radar");
    const poly = document.createElementNS("http://www.w3.org/2000/svg", "polygon");
    poly.setAttribute("points", card.radarPoints);
    svg.appendChild(poly);
    box.appendChild(svg);
  }
  const table = el("div", "objective-rows");
  for (const row of card.rows) {
    const line = el("div", "objective-row" + (row.better ? " better" : ""));
    const arrow = row.orientation === "min" ? "\u2193" : "\u2191";
    line.appendChild(el("span", "obj-name", `${row.name} ${arrow}`));
    const barBox = el("div", "bar-box");
    const bar = el("div", "bar");
    bar.style.width = `${Math.round(row.barFraction * 100)}%`;
    barBox.appendChild(bar);
    line.appendChild(barBox);
    line.appendChild(el("span", "obj-value", row.display));
    table.appendChild(line);
  }
  box.appendChild(table);
  const pick = el("button", "primary", `Prefer ${card.label}`) as HTMLButtonElement;
  pick.disabled = disabled;
  pick.onclick = onPick;
  box.appendChild(pick);
  return box;
}

function renderQuery(id: string, doc: QueryDocT) {
  const view = buildQueryView(doc);
  const page = el("div", "query-page");
  page.appendChild(el("div", "progress", view.progressText));
  const pair = el("div", "pair");
  let clicked = false;
  for (const card of view.cards) {
    pair.appendChild(
      renderCard(
        card,
        async () => {
          if (clicked) return; // the client dedupes too; this skips re-render
          clicked = true;
          page.appendChild(el("div", "busy", "recording your choice\u2026"));
          try {
            await client.respond(id, view.seq, card.choice);
          } catch (err) {
            if (!(err instanceof ApiError && err.status === 409)) {
              banner(String(err), () => void sessionPage(id));
              return;
            }
          }
          void sessionPage(id);
        },
        false,
      ),
    );
  }
  page.appendChild(pair);
  root().replaceChildren(page);
}

function renderMenu(doc: MenuDocT) {
  const view = buildMenuView(doc);
  const page = el("div", "menu-page");
  page.appendChild(el("h1", "", `Recommended solutions (top ${view.k})`));
  page.appendChild(
    el("div", "progress", `expected utility of your best pick: ${view.expectedBestDisplay}`),
  );
  const grid = el("div", "menu-grid");
  for (const item of view.items) {
    const card = el("div", "option-card");
    card.appendChild(el("h2", "", `#${item.rank}`));
    const rows = el("div", "objective-rows");
    for (const row of item.rows) {
      const line = el("div", "objective-row");
      line.appendChild(el("span", "obj-name", row.name));
      line.appendChild(el("span", "obj-value", row.display));
      rows.appendChild(line);
    }
    card.appendChild(rows);
    card.appendChild(
      el("div", "note", `model estimate ${item.meanDisplay} \u00b1 ${item.sdDisplay}`),
    );
    grid.appendChild(card);
  }
  page.appendChild(grid);
  const exportBtn = el("button", "", "Export JSON") as HTMLButtonElement;
  exportBtn.onclick = () => {
    const blob = new Blob([view.exportJson], { type: "application/json" });
    const a = el("a") as HTMLAnchorElement;
    a.href = URL.createObjectURL(blob);
    a.download = "menu.json";
    a.click();
  };
  page.appendChild(exportBtn);
  root().replaceChildren(page);
}

async function sessionPage(id: string) {
  let state: StateDocT;
  try {
    state = await pollUntil(
      () => client.state(id),
      (s) => !s.busy,
      { intervalMs: 1000, backoffFactor: 1.4 },
    );
  } catch (err) {
    banner(String(err), () => void sessionPage(id));
    return;
  }
  if (state.error) {
    banner(`session failed: ${state.error}`);
    return;
  }
  if (state.status === "finished") {
    try {
      renderMenu(await client.menu(id));
    } catch (err) {
      banner(String(err), () => void sessionPage(id));
    }
    return;
  }
  if (state.has_pending_query) {
    try {
      renderQuery(id, await client.query(id));
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        await sleep(500); // state moved under us; re-sync from the server
        void sessionPage(id);
        return;
      }
      banner(String(err), () => void sessionPage(id));
    }
    return;
  }
  root().replaceChildren(el("div", "busy", "waiting for the model\u2026"));
  await sleep(1000);
  void sessionPage(id);
}

window.addEventListener("popstate", () => void main());

function main() {
  const id = sessionIdFromUrl();
  if (id) {
    void sessionPage(id);
  } else {
    void formPage();
  }
}

main();
