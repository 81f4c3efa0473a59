#if C1
   free(p1);
#endif

#if C2
  #if C1 
    free(p2);
    x++; 
    printf(...);
  #else
    free(p3);
  #endif  
#endif   
