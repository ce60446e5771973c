/** Page entry point: start an app against the serving origin. */

import { App } from "./main.js";

const app = new App(document, window.location.origin);
void app.start();

// handy for poking at the session from the devtools console
(window as unknown as { scriptarena: App }).scriptarena = app;
