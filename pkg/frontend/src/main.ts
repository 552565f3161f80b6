// Bootstrap: load a session manifest (URL parameter or file picker) and
// start the player.

import { parseManifest } from "./session.js";
import { Player } from "./player.js";

async function start(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");

  const params = new URLSearchParams(window.location.search);
  const manifestUrl = params.get("manifest");
  if (manifestUrl) {
    const response = await fetch(manifestUrl);
    if (!response.ok) {
      root.textContent = `failed to load manifest: ${response.status}`;
      return;
    }
    new Player(parseManifest(await response.json()), root);
    return;
  }

  const picker = document.createElement("input");
  picker.type = "file";
  picker.accept = "application/json";
  const hint = document.createElement("p");
  hint.textContent = "Pick a session manifest (JSON) to start editing.";
  root.append(hint, picker);
  picker.onchange = async () => {
    const file = picker.files?.[0];
    if (!file) return;
    try {
      new Player(parseManifest(JSON.parse(await file.text())), root);
    } catch (err) {
      hint.textContent = `invalid manifest: ${err}`;
    }
  };
}

start().catch((err) => {
  const root = document.getElementById("app");
  if (root) root.textContent = String(err);
});
