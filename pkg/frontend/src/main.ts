import { ApiClient } from "./api.js";
import { SearchController } from "./controller.js";
import { mountSearchBox } from "./dom.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8765";

const api = new ApiClient(baseUrl);
const controller = new SearchController(api, {
  onRender: (state) => box.refresh(state),
});
const root = document.getElementById("search") as HTMLElement;
const box = mountSearchBox(root, controller);

void controller.start();
