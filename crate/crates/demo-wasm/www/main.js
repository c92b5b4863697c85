// Built by `wasm-bindgen --target web --out-dir www/pkg ...`; see the README.
import init, { solve_case, convergence, neumann_history } from "./pkg/mangeron_demo_wasm.js";

const CASES = ["trigonometric", "bilinear", "biquadratic", "biquadratic-zero", "smooth-variable", "piecewise-a00"];
const $ = (id) => document.getElementById(id);

function call(f, ...args) {
  const out = JSON.parse(f(...args));
  if (out.error) throw new Error(out.error);
  return out;
}

function fail(el, e) {
  el.innerHTML = "";
  const span = document.createElement("span");
  span.className = "err";
  span.textContent = e.message;
  el.appendChild(span);
}

// Blue for negative, red for positive, scaled to the largest magnitude.
function heatmap(canvas, n, values) {
  const ctx = canvas.getContext("2d");
  const peak = Math.max(...values.map(Math.abs)) || 1;
  const cell = canvas.width / n;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (let j = 0; j < n; j++) {
    for (let i = 0; i < n; i++) {
      const t = values[j * n + i] / peak;
      const a = Math.round(255 * (1 - Math.abs(t)));
      ctx.fillStyle = t >= 0 ? `rgb(255,${a},${a})` : `rgb(${a},${a},255)`;
      // y grows upwards
      ctx.fillRect(i * cell, canvas.height - (j + 1) * cell, Math.ceil(cell), Math.ceil(cell));
    }
  }
}

function runSolve() {
  const out = $("solve-out");
  try {
    const n = Number($("n").value);
    const r = call(solve_case, $("case").value, n, $("method").value);
    heatmap($("u"), n, r.u);
    heatmap($("err"), n, r.error);
    out.textContent = [
      `method      ${r.method}`,
      `iterations  ${r.iterations}`,
      `sup error   ${r.sup_error.toExponential(3)}`,
      `M1 estimate ${r.m1_estimate.toFixed(4)}`,
      `residuals   ${r.passed ? "pass" : "FAIL"}`,
      r.warning ? `warning     ${r.warning}` : "",
    ].join("\n");
  } catch (e) {
    fail(out, e);
  }
}

function runConvergence() {
  const out = $("conv-out");
  try {
    const t = call(convergence, $("conv-case").value, $("sizes").value);
    const rows = t.rows
      .map((r) => `<tr><td>${r.n}</td><td>${r.h.toFixed(5)}</td><td>${r.sup_error.toExponential(4)}</td>`
        + `<td>${r.order == null ? "" : r.order.toFixed(3)}</td></tr>`)
      .join("");
    out.innerHTML = `<table><tr><th>n</th><th>h</th><th>sup error</th><th>order</th></tr>${rows}</table>`
      + (t.exact ? "<p>exact at every size</p>" : "");
  } catch (e) {
    fail(out, e);
  }
}

function plotHistory(canvas, norms) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const logs = norms.filter((v) => v > 0 && isFinite(v)).map(Math.log10);
  if (logs.length === 0) return;
  const lo = Math.min(...logs), hi = Math.max(...logs, lo + 1);
  const px = (k) => 30 + (k / Math.max(logs.length - 1, 1)) * (w - 40);
  const py = (v) => h - 20 - ((v - lo) / (hi - lo)) * (h - 30);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(30, 10, w - 40, h - 30);
  ctx.fillStyle = "#333";
  ctx.fillText(`1e${Math.round(hi)}`, 0, 14);
  ctx.fillText(`1e${Math.round(lo)}`, 0, h - 20);
  ctx.strokeStyle = "#c33";
  ctx.beginPath();
  logs.forEach((v, k) => (k ? ctx.lineTo(px(k), py(v)) : ctx.moveTo(px(k), py(v))));
  ctx.stroke();
}

function runHistory() {
  const out = $("hist-out");
  try {
    const r = call(neumann_history, Number($("a11").value), Number($("hist-n").value));
    plotHistory($("hist"), r.update_norms);
    out.textContent = [
      `iterations  ${r.update_norms.length}`,
      `status      ${r.converged ? "converged" : r.diverged ? "diverged" : "stopped"}`,
      `method used ${r.method}`,
      `sup error   ${r.sup_error.toExponential(3)}`,
      r.warning ? `warning     ${r.warning}` : "",
    ].join("\n");
  } catch (e) {
    fail(out, e);
  }
}

await init();
for (const id of ["case", "conv-case"]) {
  $(id).innerHTML = CASES.map((c) => `<option>${c}</option>`).join("");
}
$("solve").onclick = runSolve;
$("converge").onclick = runConvergence;
$("history").onclick = runHistory;
runSolve();
