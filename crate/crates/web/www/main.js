import init, { simulate, explore_turn, verify_instance } from "./pkg/saptree_web.js";

const DRAW_LIMIT = 400;
const $ = (id) => document.getElementById(id);

let instance = null;
let beta = "2";
let layout = null;

function fail(e) {
  $("error").textContent = String(e && e.message ? e.message : e);
}

// Tidy layered layout of the final forest, so positions stay put across turns.
function computeLayout(view) {
  const adj = new Map(view.vertices.map((v) => [v.id, []]));
  for (const [b, w] of view.edges.concat(view.future_edges)) {
    adj.get(b).push(w);
    adj.get(w).push(b);
  }
  const pos = new Map();
  let column = 0;
  let depthMax = 0;
  for (const v of view.vertices) {
    if (pos.has(v.id)) continue;
    const place = (u, parent, depth) => {
      depthMax = Math.max(depthMax, depth);
      const kids = adj.get(u).filter((x) => x !== parent);
      if (kids.length === 0) {
        pos.set(u, { x: column++, y: depth });
        return;
      }
      pos.set(u, { x: 0, y: depth });
      const xs = kids.map((k) => (place(k, u, depth + 1), pos.get(k).x));
      pos.get(u).x = (xs[0] + xs[xs.length - 1]) / 2;
    };
    place(v.id, null, 0);
    column += 0.6;
  }
  return { pos, columns: Math.max(column, 1), depth: depthMax };
}

function draw(view) {
  const canvas = $("forest");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (view.vertices.length > DRAW_LIMIT) {
    ctx.fillText(`${view.vertices.length} vertices: too many to draw`, 20, 20);
    return;
  }
  const { pos, columns, depth } = layout;
  const sx = (canvas.width - 40) / columns;
  const sy = (canvas.height - 40) / Math.max(depth, 1);
  const at = (id) => {
    const p = pos.get(id);
    return [20 + p.x * sx + sx / 2, 20 + p.y * sy];
  };
  const byId = new Map(view.vertices.map((v) => [v.id, v]));
  const onPath = (list) => {
    const s = new Set();
    for (let i = 0; i + 1 < list.length; i++) s.add(list[i] + list[i + 1]).add(list[i + 1] + list[i]);
    return s;
  };
  const prefix = onPath(view.prefix.concat(view.suffix.slice(0, 1)));
  const suffix = onPath(view.suffix);

  const line = (a, b, colour, width, dash) => {
    ctx.strokeStyle = colour;
    ctx.lineWidth = width;
    ctx.setLineDash(dash);
    ctx.beginPath();
    ctx.moveTo(...at(a));
    ctx.lineTo(...at(b));
    ctx.stroke();
  };
  for (const [b, w] of view.future_edges) line(b, w, "#ddd", 1, [3, 3]);
  for (const [b, w] of view.edges) {
    const key = b + w;
    const matched = byId.get(b).mate === w;
    const colour = suffix.has(key) ? "#27c" : prefix.has(key) ? "#d62" : matched ? "#2a2" : "#888";
    line(b, w, colour, suffix.has(key) || prefix.has(key) || matched ? 3 : 1, []);
  }
  ctx.setLineDash([]);
  ctx.font = "11px sans-serif";
  for (const v of view.vertices) {
    const [x, y] = at(v.id);
    const grey = !v.arrived || !v.alive;
    ctx.fillStyle = grey ? "#bbb" : "#222";
    ctx.strokeStyle = grey ? "#bbb" : "#222";
    ctx.lineWidth = v.id === view.dispatcher ? 3 : 1;
    ctx.beginPath();
    if (v.white) {
      ctx.arc(x, y, 6, 0, 2 * Math.PI);
      ctx.fillStyle = "#fff";
      ctx.fill();
      ctx.stroke();
    } else if (v.arrived) {
      ctx.rect(x - 6, y - 6, 12, 12);
      ctx.fill();
      ctx.stroke();
    } else {
      ctx.rect(x - 6, y - 6, 12, 12);
      ctx.stroke();
    }
    ctx.fillStyle = grey ? "#999" : "#222";
    ctx.fillText(`${v.id}:${v.level}`, x + 8, y - 6);
  }
}

function showTurn(t) {
  if (!instance) return;
  try {
    const view = JSON.parse(explore_turn(instance, t, beta));
    if (!layout && view.vertices.length <= DRAW_LIMIT) layout = computeLayout(view);
    $("turn").value = t;
    $("turn-label").textContent = `turn ${t} / ${view.turns}`;
    draw(view);
    $("turn-info").textContent =
      t === 0
        ? "no arrivals yet"
        : `${view.arrival} arrives (${view.turn_class}); path ${view.path.join(" ")}; ` +
          `dispatcher ${view.dispatcher ?? "none"}; deaths ${view.deaths.length}; ` +
          `augmenting path ${view.augmenting_path.join(" ") || "none"}`;
    $("error").textContent = "";
  } catch (e) {
    fail(e);
  }
}

function renderRows(rows) {
  const cols = ["t", "b_id", "pi_len", "dist", "sec_dist", "prefix_len", "suffix_len", "dispatch_id", "deaths_count", "turn_class"];
  const table = $("rows");
  table.innerHTML = "";
  const head = table.insertRow();
  for (const c of cols) head.appendChild(document.createElement("th")).textContent = c;
  for (const r of rows.slice(0, 500)) {
    const tr = table.insertRow();
    for (const c of cols) tr.insertCell().textContent = r[c] ?? "";
    tr.onclick = () => showTurn(r.t);
  }
}

function runSimulation() {
  try {
    const sim = JSON.parse(simulate($("family").value, Number($("n").value), Number($("seed").value), $("beta").value));
    instance = sim.instance;
    beta = $("beta").value;
    layout = null;
    const a = sim.audit;
    const b = a.budgets;
    $("summary").textContent =
      `n=${a.n} turns=${a.turns} sum_sap=${a.sum_sap} sum_dist=${a.sum_dist}\n` +
      `prefix ${a.sum_prefix} <= ${b.prefix.toFixed(1)}   slow ${a.sum_slow_suffix} <= ${b.slow.toFixed(1)}   ` +
      `jump ${a.sum_jump_suffix} <= ${b.jump.toFixed(1)}   total ${a.sum_dist} <= ${b.total.toFixed(1)}\n` +
      `audit ${a.violations.length === 0 ? "clean" : a.violations.length + " violation(s)"}; ` +
      `ledger ${sim.ledger.feasible ? "feasible" : "infeasible"}, ${sim.ledger.jump_turns} jumping turns`;
    $("checks").textContent = "";
    renderRows(sim.rows);
    $("turn").max = sim.rows.length;
    showTurn(sim.rows.length);
  } catch (e) {
    fail(e);
  }
}

function runVerify() {
  if (!instance) return;
  try {
    const outcomes = JSON.parse(verify_instance(instance, true));
    $("checks").textContent = outcomes.map((o) => `${o.status.toUpperCase()} ${o.name} ${o.detail}`).join("\n");
  } catch (e) {
    fail(e);
  }
}

await init();
$("simulate").onclick = runSimulation;
$("verify").onclick = runVerify;
$("turn").oninput = (e) => showTurn(Number(e.target.value));
$("prev").onclick = () => showTurn(Math.max(0, Number($("turn").value) - 1));
$("next").onclick = () => showTurn(Math.min(Number($("turn").max), Number($("turn").value) + 1));
runSimulation();
