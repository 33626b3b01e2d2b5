import { ApiClient } from "./api.js";
import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://127.0.0.1:8765";
const root = document.getElementById("app");
if (root) {
  const app = new App(new ApiClient(base), root);
  void app.refresh();
}
