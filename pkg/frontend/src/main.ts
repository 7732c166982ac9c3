import { App } from "./app.js";
import { StudioApi } from "./api.js";

const root = document.getElementById("root");
if (root) {
  // same-origin: the UI is served by the service it talks to
  new App(new StudioApi(""), root).start();
}
