// Expects the wasm-bindgen output (--target web) in ./pkg.
import init, { density_slice, axis_profiles, dipole_potential, grid_size } from "./pkg/photon_lab_wasm.js";

const $ = (id) => document.getElementById(id);

function heat(canvas, values, n, m, signed) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(m, n);
  let peak = 0;
  for (const v of values) peak = Math.max(peak, Math.abs(v));
  peak = peak || 1;
  for (let i = 0; i < n * m; i++) {
    const u = values[i] / peak;
    let r, g, b;
    if (signed) {
      r = u > 0 ? 255 : 255 * (1 + u);
      b = u < 0 ? 255 : 255 * (1 - u);
      g = 255 * (1 - Math.abs(u));
    } else {
      r = 255 * Math.min(1, 2 * u);
      g = 255 * Math.max(0, 2 * u - 1);
      b = 64 * (1 - u);
    }
    img.data.set([r, g, b, 255], 4 * i);
  }
  const off = new OffscreenCanvas(m, n);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

function plot(canvas, data, n) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const colors = ["#c22", "#26c", "#2a2"];
  const h = canvas.height - 20;
  for (let c = 0; c < 3; c++) {
    ctx.strokeStyle = colors[c];
    ctx.beginPath();
    for (let i = 0; i < n; i++) {
      const x = (i / (n - 1)) * canvas.width;
      const y = 10 + h * (1 - data[c * n + i]);
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    }
    ctx.stroke();
  }
}

function packetInputs() {
  return [parseFloat($("k0").value), parseFloat($("sigma").value), parseInt($("hel").value), parseFloat($("t").value)];
}

function redrawPacket() {
  const [k0, sigma, hel, t] = packetInputs();
  $("tval").textContent = t.toFixed(1);
  const n = grid_size();
  try {
    const kind = $("kind").value;
    heat($("slice"), density_slice(kind, k0, sigma, hel, t), n, n, kind === "helicity");
    plot($("profiles"), axis_profiles(k0, sigma, hel, t), n);
    $("status").textContent = "";
  } catch (e) {
    $("status").textContent = String(e);
  }
}

function redrawDipole() {
  const m = 48;
  try {
    heat($("dipole"), dipole_potential(parseFloat($("omega").value), parseFloat($("dt").value), m, 4.0), m, m, false);
  } catch (e) {
    $("status").textContent = String(e);
  }
}

await init();
for (const id of ["k0", "sigma", "hel", "t", "kind"]) $(id).addEventListener("input", redrawPacket);
$("dipole-go").addEventListener("click", redrawDipole);
redrawPacket();
redrawDipole();
