# rydsat: simulate a Rydberg atom receiver for satellite microwave signals.
