import { bootApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  void bootApp(root);
}
