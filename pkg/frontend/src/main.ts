import { RiskgridClient } from "./client.js";
import { loadConfig } from "./config.js";
import { RiskMap } from "./map.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app container");
  const config = await loadConfig();
  const client = new RiskgridClient(config.apiBase);
  const map = new RiskMap(root, client, config, {
    width: Math.max(480, window.innerWidth - 360),
    height: Math.max(360, window.innerHeight - 40),
  });

  window.addEventListener("keydown", (ev) => {
    const vp = map.viewport();
    const stepLat = (vp.bounds.maxLat - vp.bounds.minLat) / 4;
    const stepLon = (vp.bounds.maxLon - vp.bounds.minLon) / 4;
    if (ev.key === "ArrowUp") map.panBy(stepLat, 0);
    else if (ev.key === "ArrowDown") map.panBy(-stepLat, 0);
    else if (ev.key === "ArrowLeft") map.panBy(0, -stepLon);
    else if (ev.key === "ArrowRight") map.panBy(0, stepLon);
    else if (ev.key === "+" || ev.key === "=") map.zoomIn();
    else if (ev.key === "-") map.zoomOut();
  });

  await map.start();
}

void boot();
