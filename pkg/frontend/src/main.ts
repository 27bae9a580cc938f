import { ApiClient } from "./api";
import { App } from "./app";
import { PlotlyRenderer } from "./plotly";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app container");
}
const app = new App(root, new ApiClient(), new PlotlyRenderer());
void app.boot();
