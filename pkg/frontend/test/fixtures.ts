// Payloads recorded from a real service run (create -> answer warm-up and
// elicited queries -> menu). Regenerate by re-recording against the service;
// never edit numbers by hand.

export const fixtures = {
 "problems": {
  "schema_version": 1,
  "problems": [
   {
    "id": "dtlz7-5-2",
    "d": 5,
    "m": 2,
    "objective_names": [
     "f1",
     "f2"
    ],
    "orientations": [
     "min",
     "min"
    ],
    "default_utility": "linear-sum"
   },
   {
    "id": "dtlz7-5-3",
    "d": 5,
    "m": 3,
    "objective_names": [
     "f1",
     "f2",
     "f3"
    ],
    "orientations": [
     "min",
     "min",
     "min"
    ],
    "default_utility": "linear-sum"
   },
   {
    "id": "dtlz2-9-6",
    "d": 9,
    "m": 6,
    "objective_names": [
     "f1",
     "f2",
     "f3",
     "f4",
     "f5",
     "f6"
    ],
    "orientations": [
     "min",
     "min",
     "min",
     "min",
     "min",
     "min"
    ],
    "default_utility": "cubic-norm-to-ideal"
   },
   {
    "id": "wfg3-14-9",
    "d": 14,
    "m": 9,
    "objective_names": [
     "f1",
     "f2",
     "f3",
     "f4",
     "f5",
     "f6",
     "f7",
     "f8",
     "f9"
    ],
    "orientations": [
     "min",
     "min",
     "min",
     "min",
     "min",
     "min",
     "min",
     "min",
     "min"
    ],
    "default_utility": "soft-min-exponential"
   },
   {
    "id": "carcab-7-9",
    "d": 7,
    "m": 9,
    "objective_names": [
     "weight",
     "abdomen_load",
     "vc_upper",
     "vc_mid",
     "vc_lower",
     "rib_upper",
     "rib_mid",
     "rib_lower",
     "pubic_force"
    ],
    "orientations": [
     "min",
     "min",
     "min",
     "min",
     "min",
     "min",
     "min",
     "min",
     "min"
    ],
    "default_utility": "piecewise-linear-sum"
   }
  ]
 },
 "created": {
  "id": "231175f7e1e0",
  "status": "collecting-initial"
 },
 "state_initial": {
  "schema_version": 1,
  "id": "231175f7e1e0",
  "status": "collecting-initial",
  "busy": false,
  "error": null,
  "problem": "dtlz7-5-3",
  "variant": "int-obj",
  "dm_mode": "live",
  "progress": {
   "interaction": 0,
   "budget": 1,
   "initial_remaining": 2
  },
  "has_pending_query": true,
  "menu_ready": false
 },
 "query": {
  "schema_version": 1,
  "seq": 0,
  "origin": "initial",
  "objective_names": [
   "f1",
   "f2",
   "f3"
  ],
  "orientations": [
   "min",
   "min",
   "min"
  ],
  "options": [
   {
    "objectives": [
     0.44779805417813856,
     0.9887457674560196,
     14.169780037143813
    ]
   },
   {
    "objectives": [
     0.9131553558830773,
     0.009635165999324125,
     25.657495474470714
    ]
   }
  ],
  "progress": {
   "interaction": 0,
   "budget": 1,
   "initial_remaining": 2,
   "initial_total": 2
  }
 },
 "query_with_decisions": {
  "schema_version": 1,
  "seq": 0,
  "origin": "initial",
  "objective_names": [
   "f1",
   "f2",
   "f3"
  ],
  "orientations": [
   "min",
   "min",
   "min"
  ],
  "options": [
   {
    "objectives": [
     0.44779805417813856,
     0.9887457674560196,
     14.169780037143813
    ],
    "decision": [
     0.44779805417813856,
     0.9887457674560196,
     0.555122336632531,
     0.1135603670141987,
     0.36646350066239086
    ]
   },
   {
    "objectives": [
     0.9131553558830773,
     0.009635165999324125,
     25.657495474470714
    ],
    "decision": [
     0.9131553558830773,
     0.009635165999324125,
     0.8135680585655225,
     0.8226053044683973,
     0.7247009663316092
    ]
   }
  ],
  "progress": {
   "interaction": 0,
   "budget": 1,
   "initial_remaining": 2,
   "initial_total": 2
  }
 },
 "ack": {
  "accepted": true,
  "seq": 0,
  "status": "collecting-initial",
  "progress": {
   "interaction": 0,
   "budget": 1
  }
 },
 "state_mid": {
  "schema_version": 1,
  "id": "231175f7e1e0",
  "status": "awaiting-response",
  "busy": false,
  "error": null,
  "problem": "dtlz7-5-3",
  "variant": "int-obj",
  "dm_mode": "live",
  "progress": {
   "interaction": 0,
   "budget": 1,
   "initial_remaining": 0
  },
  "has_pending_query": true,
  "menu_ready": false
 },
 "query_elicited": {
  "schema_version": 1,
  "seq": 2,
  "origin": "elicited",
  "objective_names": [
   "f1",
   "f2",
   "f3"
  ],
  "orientations": [
   "min",
   "min",
   "min"
  ],
  "options": [
   {
    "objectives": [
     0.0,
     0.6585651487112045,
     18.029038779954757
    ]
   },
   {
    "objectives": [
     0.8779049636796117,
     0.7776674795895815,
     13.21134511823864
    ]
   }
  ],
  "progress": {
   "interaction": 0,
   "budget": 1,
   "initial_remaining": 0,
   "initial_total": 2
  }
 },
 "state_finished": {
  "schema_version": 1,
  "id": "231175f7e1e0",
  "status": "finished",
  "busy": false,
  "error": null,
  "problem": "dtlz7-5-3",
  "variant": "int-obj",
  "dm_mode": "live",
  "progress": {
   "interaction": 1,
   "budget": 1,
   "initial_remaining": 0
  },
  "has_pending_query": false,
  "menu_ready": true
 },
 "menu": {
  "k": 3,
  "construction": "greedy",
  "expected_best_utility": 0.6986849045541664,
  "prefix_values": [
   0.5837032994583766,
   0.6610132950583203,
   0.6986849045541664
  ],
  "decisions": [
   [
    0.0,
    0.6585651487112045,
    0.7694500423967838,
    0.5354432221502066,
    0.0992587385699153
   ],
   [
    0.15888581555784898,
    0.46761331455100164,
    0.7611631817178574,
    0.564900317828713,
    0.49392420951940175
   ],
   [
    0.44779805417813856,
    0.9887457674560196,
    0.555122336632531,
    0.1135603670141987,
    0.36646350066239086
   ]
  ],
  "inputs": [
   [
    -0.0,
    -0.6585651487112045,
    -18.029038779954757
   ],
   [
    -0.15888581555784898,
    -0.46761331455100164,
    -22.040929662405425
   ],
   [
    -0.44779805417813856,
    -0.9887457674560196,
    -14.169780037143813
   ]
  ],
  "item_means": [
   0.5837032994583766,
   0.44686654009492927,
   0.16771342881875761
  ],
  "item_variances": [
   0.39217490803957744,
   0.45930350006387444,
   0.44664997628799447
  ],
  "indices": [
   4,
   3,
   0
  ],
  "objectives": [
   [
    0.0,
    0.6585651487112045,
    18.029038779954757
   ],
   [
    0.15888581555784898,
    0.46761331455100164,
    22.040929662405425
   ],
   [
    0.44779805417813856,
    0.9887457674560196,
    14.169780037143813
   ]
  ],
  "objective_names": [
   "f1",
   "f2",
   "f3"
  ],
  "orientations": [
   "min",
   "min",
   "min"
  ],
  "schema_version": 1
 },
 "error_409": {
  "error": "session finished; fetch the menu",
  "menu": "/v1/sessions/231175f7e1e0/menu"
 }
} as const;
