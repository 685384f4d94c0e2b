// Browser entry point: same-origin API, EventSource-backed live stream.

import { ApiClient, eventSourceStream } from "./api.js";
import { createApp } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
createApp(root, new ApiClient(), eventSourceStream());
