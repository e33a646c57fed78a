// Application shell: API key entry, tab navigation, view mounting.

import { ApiClient, storedApiKey } from "./api.js";
import { clear, el } from "./dom.js";
import { pvForm, retrofitForm } from "./forms.js";
import { PlaygroundView } from "./playground.js";

export function mountApp(root: HTMLElement, api: ApiClient = new ApiClient()): void {
  clear(root);

  const keyInput = el("input", {
    type: "password",
    class: "api-key",
    placeholder: "APIKEY-...",
    value: storedApiKey(),
  });
  keyInput.addEventListener("change", () => api.setApiKey(keyInput.value.trim()));

  const header = el(
    "header",
    { class: "app-header" },
    el("h1", { text: "Building Energy Dashboard" }),
    el("div", { class: "key-entry" }, el("label", { text: "API key" }), keyInput),
  );

  const views: Record<string, HTMLElement> = {
    retrofit: retrofitForm(api).root,
    pv: pvForm(api).root,
    playground: new PlaygroundView(api).root,
  };

  const content = el("main", { class: "content" });
  const nav = el("nav", { class: "tabs" });
  const tabs: Record<string, HTMLButtonElement> = {};
  const select = (name: string) => {
    clear(content);
    content.append(views[name]);
    for (const [tabName, button] of Object.entries(tabs)) {
      button.classList.toggle("active", tabName === name);
    }
  };
  for (const [name, label] of [
    ["retrofit", "Building Retrofitting"],
    ["pv", "Photovoltaic Installation"],
    ["playground", "Training Playground"],
  ] as const) {
    const button = el("button", { class: "tab", text: label, "data-tab": name });
    button.addEventListener("click", () => select(name));
    tabs[name] = button;
    nav.append(button);
  }

  root.append(header, nav, content);
  select("retrofit");
}

const appRoot = typeof document !== "undefined" ? document.getElementById("app") : null;
if (appRoot !== null) {
  mountApp(appRoot);
}
