import { ApiClient } from "./api.js";
import { sessionFromUrl, Store } from "./state.js";
import { mount } from "./ui.js";

const session = sessionFromUrl(window.location.search);
if (!window.location.search.includes("session=")) {
  const url = new URL(window.location.href);
  url.searchParams.set("session", session);
  window.history.replaceState(null, "", url.toString());
}

const api = new ApiClient("");
const store = new Store(api, session);
mount(document.getElementById("app") as HTMLElement, store);

store
  .load()
  .then(() => Promise.all([store.refreshPreview(null), store.refreshHistory()]))
  .catch((err) => {
    const node = document.getElementById("config-error");
    if (node) {
      node.classList.remove("hidden");
      node.textContent = `failed to reach the planning service: ${err}`;
    }
  });
