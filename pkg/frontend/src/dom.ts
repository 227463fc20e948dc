// DOM layer: renders the controller state under the input field and wires
// mouse/keyboard events. The suggestion list is shown exactly as served:
// main section first, then a labeled "Alternative Search Terms" block.

import { SuggestionItem } from "./api.js";
import { SERVICES, SearchController, UiState } from "./controller.js";

export interface MountedSearchBox {
  root: HTMLElement;
  input: HTMLInputElement;
  refresh(state?: UiState): void;
}

export function mountSearchBox(
  root: HTMLElement,
  controller: SearchController
): MountedSearchBox {
  root.classList.add("termsuggest-box");

  const controls = document.createElement("div");
  controls.className = "ts-controls";
  const picker = document.createElement("select");
  picker.className = "ts-service";
  for (const service of SERVICES) {
    const option = document.createElement("option");
    option.value = service;
    option.textContent = service;
    picker.appendChild(option);
  }
  picker.value = controller.state.service;
  picker.addEventListener("change", () => {
    controller.setService(picker.value as (typeof SERVICES)[number]);
  });
  controls.appendChild(picker);

  const row = document.createElement("div");
  row.className = "ts-row";
  const input = document.createElement("input");
  input.type = "text";
  input.autocomplete = "off";
  input.className = "ts-input";
  input.placeholder = "Search…";
  const button = document.createElement("button");
  button.type = "button";
  button.className = "ts-submit";
  button.textContent = "Search";
  row.appendChild(input);
  row.appendChild(button);

  const dropdown = document.createElement("div");
  dropdown.className = "ts-dropdown";
  dropdown.hidden = true;

  const status = document.createElement("div");
  status.className = "ts-status";

  root.appendChild(controls);
  root.appendChild(row);
  root.appendChild(dropdown);
  root.appendChild(status);

  input.addEventListener("input", () => {
    controller.handleInput(input.value);
  });
  input.addEventListener("keydown", (event) => {
    if (["ArrowDown", "ArrowUp", "Enter", "Escape"].includes(event.key)) {
      event.preventDefault();
      void controller.handleKey(event.key);
    }
  });
  button.addEventListener("click", () => {
    void controller.submit();
  });

  function renderItem(item: SuggestionItem, index: number, state: UiState) {
    const element = document.createElement("div");
    element.className = "ts-item";
    element.dataset.index = String(index);
    element.dataset.position = String(item.position);
    element.dataset.section = item.section;
    element.textContent = item.term;
    if (index === state.highlighted) {
      element.classList.add("ts-highlighted");
    }
    // mousedown, not click: the input must not lose focus first
    element.addEventListener("mousedown", (event) => {
      event.preventDefault();
      void controller.selectIndex(index);
    });
    return element;
  }

  function refresh(state: UiState = controller.state): void {
    if (input.value !== state.input) {
      input.value = state.input;
    }
    picker.value = state.service;
    dropdown.replaceChildren();
    dropdown.hidden = !state.open || state.suggestions.length === 0;
    if (!dropdown.hidden) {
      state.suggestions.forEach((item, index) => {
        if (
          item.section === "alternative" &&
          (index === 0 || state.suggestions[index - 1].section === "main")
        ) {
          const label = document.createElement("div");
          label.className = "ts-alt-label";
          label.textContent = "Alternative Search Terms";
          dropdown.appendChild(label);
        }
        dropdown.appendChild(renderItem(item, index, state));
      });
    }
    const parts: string[] = [];
    if (state.resultCount !== null) {
      parts.push(`${state.resultCount} results`);
    }
    if (state.lastError) {
      parts.push(`offline: ${state.lastError}`);
    }
    status.textContent = parts.join(" · ");
  }

  return { root, input, refresh };
}
